//! Gradient-boosted regression trees on the logistic loss, with Newton leaf
//! values, shrinkage and L2 leaf regularization.

use super::tree::midpoint;
use super::{check_dim, Dataset, Prediction};
use crate::error::LearnError;
use crate::scalar::{sigmoid, Scalar};

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    /// η, in (0, 1].
    pub shrinkage: f64,
    pub rounds: usize,
    pub max_depth: usize,
    pub leaf_lambda: f64,
}

impl Default for GbtParams {
    /// η = 0.1, 100 rounds, depth 3, leaf λ = 1.
    fn default() -> Self {
        GbtParams {
            shrinkage: 0.1,
            rounds: 100,
            max_depth: 3,
            leaf_lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionNode<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        value: T,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    pub nodes: Vec<RegressionNode<T>>,
}

impl<T: Scalar> RegressionTree<T> {
    pub fn predict(&self, x: &[T]) -> T {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
                RegressionNode::Leaf { value } => return value,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel<T> {
    pub trees: Vec<RegressionTree<T>>,
    pub shrinkage: f64,
    /// Rounds requested; `trees.len()` is smaller only when stopped early.
    pub n_rounds: usize,
    pub max_depth: usize,
    pub leaf_lambda: f64,
    /// Prior log-odds of REAL.
    pub base_score: T,
    pub n_features: usize,
    /// Round whose tree was rejected for raising the training loss.
    pub early_stopped: Option<usize>,
    /// Mean training log-loss after the prior and after each kept round.
    pub loss_history: Vec<T>,
}

impl<T: Scalar> GbtModel<T> {
    pub fn raw_score(&self, x: &[T]) -> T {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.predict(x))
    }

    pub fn predict_with_threshold(
        &self,
        x: &[T],
        threshold: f64,
    ) -> Result<Prediction<T>, LearnError> {
        check_dim(self.n_features, x)?;
        let p = sigmoid(self.raw_score(x));
        Ok(Prediction::from_confidence(p, p, threshold))
    }
}

/// Mean logistic loss of raw scores against the dataset labels.
pub fn log_loss<T: Scalar>(data: &Dataset<T>, raw: &[T]) -> T {
    let total: T = raw
        .iter()
        .zip(&data.labels)
        .map(|(&f, l)| {
            // ln(1 + e^f) - y f, with the softplus kept stable
            let softplus = f.max(T::zero()) + (-f.abs()).exp().ln_1p();
            if l.is_real() {
                softplus - f
            } else {
                softplus
            }
        })
        .sum();
    total / T::from_usize_lossy(data.len())
}

fn leaf_weight<T: Scalar>(g: T, h: T, lambda: T) -> T {
    -g / (h + lambda)
}

fn structure_score<T: Scalar>(g: T, h: T, lambda: T) -> T {
    g * g / (h + lambda)
}

struct TreeFit<'a, T: Scalar> {
    data: &'a Dataset<T>,
    grad: &'a [T],
    hess: &'a [T],
    max_depth: usize,
    lambda: T,
    shrinkage: T,
    nodes: Vec<RegressionNode<T>>,
}

impl<T: Scalar> TreeFit<'_, T> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let g: T = rows.iter().map(|&i| self.grad[i]).sum();
        let h: T = rows.iter().map(|&i| self.hess[i]).sum();
        let at = self.nodes.len();
        self.nodes.push(RegressionNode::Leaf {
            value: self.shrinkage * leaf_weight(g, h, self.lambda),
        });
        if depth >= self.max_depth || rows.len() < 2 {
            return at;
        }
        let parent = structure_score(g, h, self.lambda);
        let eps = T::from_f64_lossy(GAIN_EPS);
        let mut best: Option<(T, usize, T)> = None;
        let mut sorted = rows.clone();
        for f in 0..self.data.n_features() {
            sorted.sort_by(|&a, &b| {
                self.data.row(a)[f]
                    .partial_cmp(&self.data.row(b)[f])
                    .expect("finite")
            });
            let (mut gl, mut hl) = (T::zero(), T::zero());
            for k in 1..sorted.len() {
                let prev = sorted[k - 1];
                gl += self.grad[prev];
                hl += self.hess[prev];
                let (lo, hi) = (self.data.row(prev)[f], self.data.row(sorted[k])[f]);
                if lo == hi {
                    continue;
                }
                let gain = structure_score(gl, hl, self.lambda)
                    + structure_score(g - gl, h - hl, self.lambda)
                    - parent;
                if gain > eps && best.is_none_or(|(b, _, _)| gain > b + eps) {
                    best = Some((gain, f, midpoint(lo, hi)));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.data.row(i)[feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = RegressionNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Fits one depth-limited tree to per-row gradients and hessians. Splits
/// maximize the second-order gain `G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)`;
/// each leaf holds `-shrinkage · ΣG / (ΣH + λ)`.
pub fn fit_regression_tree<T: Scalar>(
    data: &Dataset<T>,
    grad: &[T],
    hess: &[T],
    max_depth: usize,
    leaf_lambda: f64,
    shrinkage: f64,
) -> RegressionTree<T> {
    let mut fit = TreeFit {
        data,
        grad,
        hess,
        max_depth,
        lambda: T::from_f64_lossy(leaf_lambda),
        shrinkage: T::from_f64_lossy(shrinkage),
        nodes: Vec::new(),
    };
    fit.grow((0..data.len()).collect(), 0);
    RegressionTree { nodes: fit.nodes }
}

/// Stagewise boosting from the prior log-odds. A round is kept only if the
/// full training log-loss does not rise; the first rejected round ends
/// training and is recorded in `early_stopped`.
pub fn train_gbt<T: Scalar>(
    data: &Dataset<T>,
    params: &GbtParams,
) -> Result<GbtModel<T>, LearnError> {
    if !(params.shrinkage > 0.0 && params.shrinkage <= 1.0) {
        return Err(LearnError::InvalidParameter(format!(
            "shrinkage must be in (0, 1], got {}",
            params.shrinkage
        )));
    }
    if !(params.leaf_lambda >= 0.0 && params.leaf_lambda.is_finite()) {
        return Err(LearnError::InvalidParameter(
            "leaf lambda must be non-negative".into(),
        ));
    }
    data.require_both_classes()?;
    let n = data.len();
    let p = data.count(crate::ingest::Label::Real) as f64 / n as f64;
    let base_score = T::from_f64_lossy((p / (1.0 - p)).ln());
    let mut raw = vec![base_score; n];
    let mut loss = log_loss(data, &raw);
    let mut model = GbtModel {
        trees: Vec::new(),
        shrinkage: params.shrinkage,
        n_rounds: params.rounds,
        max_depth: params.max_depth,
        leaf_lambda: params.leaf_lambda,
        base_score,
        n_features: data.n_features(),
        early_stopped: None,
        loss_history: vec![loss],
    };
    let y: Vec<T> = data
        .labels
        .iter()
        .map(|l| if l.is_real() { T::one() } else { T::zero() })
        .collect();
    for round in 0..params.rounds {
        let prob: Vec<T> = raw.iter().map(|&f| sigmoid(f)).collect();
        let grad: Vec<T> = prob.iter().zip(&y).map(|(&p, &y)| p - y).collect();
        let hess: Vec<T> = prob.iter().map(|&p| p * (T::one() - p)).collect();
        let tree = fit_regression_tree(
            data,
            &grad,
            &hess,
            params.max_depth,
            params.leaf_lambda,
            params.shrinkage,
        );
        let next: Vec<T> = raw
            .iter()
            .enumerate()
            .map(|(i, &f)| f + tree.predict(data.row(i)))
            .collect();
        let next_loss = log_loss(data, &next);
        if next_loss > loss {
            model.early_stopped = Some(round);
            break;
        }
        raw = next;
        loss = next_loss;
        model.trees.push(tree);
        model.loss_history.push(loss);
    }
    Ok(model)
}
