//! Linear SVM trained by Pegasos-style stochastic subgradient descent.
//!
//! Objective over labels y ∈ {+1 (REAL), -1 (SPURIOUS)}:
//!
//! ```text
//! J(w, b) = λ/2 (|w|² + b²) + 1/n Σ max(0, 1 - y (w·x + b))
//! ```
//!
//! The bias is regularized along with the weights (equivalently, a constant
//! feature of 1 is appended), which keeps the 1/(λt) steps stable.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_dim, Dataset, Prediction};
use crate::error::LearnError;
use crate::scalar::{dot, sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl SvmParams {
    /// λ = 1e-4, 50 epochs.
    pub fn new(seed: u64) -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 50,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl<T: Scalar> LinearSvmModel<T> {
    pub fn margin(&self, x: &[T]) -> T {
        dot(&self.weights, x) + self.bias
    }

    /// Score is the raw margin; confidence is σ(margin), so the default
    /// threshold of 0.5 is the sign of the margin.
    pub fn predict_with_threshold(
        &self,
        x: &[T],
        threshold: f64,
    ) -> Result<Prediction<T>, LearnError> {
        check_dim(self.weights.len(), x)?;
        let m = self.margin(x);
        Ok(Prediction::from_confidence(m, sigmoid(m), threshold))
    }
}

fn sign<T: Scalar>(data: &Dataset<T>, i: usize) -> T {
    T::from_f64_lossy(data.labels[i].sign())
}

/// Derivative of the hinge `max(0, 1 - m)` with respect to the margin `m`,
/// taking 0 at the kink.
pub fn hinge_slope<T: Scalar>(margin: T) -> T {
    if margin < T::one() {
        -T::one()
    } else {
        T::zero()
    }
}

pub fn svm_objective<T: Scalar>(weights: &[T], bias: T, data: &Dataset<T>, lambda: f64) -> T {
    let lambda = T::from_f64_lossy(lambda);
    let half = T::from_f64_lossy(0.5);
    let reg = half * lambda * (dot(weights, weights) + bias * bias);
    let hinge: T = (0..data.len())
        .map(|i| (T::one() - sign(data, i) * (dot(weights, data.row(i)) + bias)).max(T::zero()))
        .sum();
    reg + hinge / T::from_usize_lossy(data.len())
}

/// Subgradient of [`svm_objective`] as `(d/dw, d/db)`.
pub fn svm_subgradient<T: Scalar>(
    weights: &[T],
    bias: T,
    data: &Dataset<T>,
    lambda: f64,
) -> (Vec<T>, T) {
    let lambda = T::from_f64_lossy(lambda);
    let n = T::from_usize_lossy(data.len());
    let mut gw: Vec<T> = weights.iter().map(|&w| lambda * w).collect();
    let mut gb = lambda * bias;
    for i in 0..data.len() {
        let y = sign(data, i);
        let x = data.row(i);
        let c = hinge_slope(y * (dot(weights, x) + bias)) * y / n;
        for (g, &v) in gw.iter_mut().zip(x) {
            *g += c * v;
        }
        gb += c;
    }
    (gw, gb)
}

/// Pegasos: one shuffled pass per epoch, step 1/(λt), followed by projection
/// onto the ball of radius 1/√λ. The returned parameters are the
/// end-of-epoch iterate with the lowest full objective, starting from the
/// zero vector.
pub fn train_svm<T: Scalar>(
    data: &Dataset<T>,
    params: &SvmParams,
) -> Result<LinearSvmModel<T>, LearnError> {
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(LearnError::InvalidParameter(format!(
            "lambda must be positive, got {}",
            params.lambda
        )));
    }
    data.require_both_classes()?;
    let d = data.n_features();
    let lambda = T::from_f64_lossy(params.lambda);
    let radius = T::from_f64_lossy(1.0 / params.lambda.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut best = (w.clone(), b, svm_objective(&w, b, data, params.lambda));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t: u64 = 0;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = T::one() / (lambda * T::from_f64_lossy(t as f64));
            let y = sign(data, i);
            let x = data.row(i);
            let c = hinge_slope(y * (dot(&w, x) + b)) * y;
            for (wk, &xk) in w.iter_mut().zip(x) {
                *wk -= eta * (lambda * *wk + c * xk);
            }
            b -= eta * (lambda * b + c);
            let norm = (dot(&w, &w) + b * b).sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
                b *= s;
            }
        }
        let obj = svm_objective(&w, b, data, params.lambda);
        if obj < best.2 {
            best = (w.clone(), b, obj);
        }
    }
    Ok(LinearSvmModel {
        weights: best.0,
        bias: best.1,
        lambda: params.lambda,
        epochs: params.epochs,
        seed: params.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Label;

    fn line() -> Dataset<f64> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            rows.push(vec![-1.0]);
            labels.push(Label::Spurious);
            rows.push(vec![1.0]);
            labels.push(Label::Real);
        }
        Dataset::new(rows, labels).unwrap()
    }

    #[test]
    fn symmetric_line_is_separated() {
        let d = line();
        let m = train_svm(&d, &SvmParams::new(5)).unwrap();
        assert!(m.weights[0] > 0.0);
        for (x, &l) in d.rows().zip(&d.labels) {
            assert_eq!(m.predict_with_threshold(x, 0.5).unwrap().label, l);
        }
    }

    #[test]
    fn objective_never_worse_than_zero_start() {
        let d = line();
        let m = train_svm(
            &d,
            &SvmParams {
                epochs: 3,
                ..SvmParams::new(1)
            },
        )
        .unwrap();
        assert!(
            svm_objective(&m.weights, m.bias, &d, m.lambda)
                <= svm_objective(&[0.0], 0.0, &d, m.lambda)
        );
    }

    #[test]
    fn zero_model_ties_to_spurious() {
        let m = LinearSvmModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            lambda: 1.0,
            epochs: 0,
            seed: 0,
        };
        let p = m.predict_with_threshold(&[3.0, -2.0], 0.5).unwrap();
        assert_eq!((p.label, p.score), (Label::Spurious, 0.0));
    }

    #[test]
    fn invalid_inputs() {
        let d = line();
        assert!(matches!(
            train_svm(
                &d,
                &SvmParams {
                    lambda: 0.0,
                    ..SvmParams::new(0)
                }
            ),
            Err(LearnError::InvalidParameter(_))
        ));
        let one_class = d.subset(&[1, 3, 5]);
        assert!(matches!(
            train_svm(&one_class, &SvmParams::new(0)),
            Err(LearnError::InvalidData(_))
        ));
    }
}
