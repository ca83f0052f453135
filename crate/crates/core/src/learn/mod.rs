//! The four classifiers and their shared prediction contract.

mod ensemble;
mod forest;
mod gbt;
mod io;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

pub use ensemble::{train_ensemble, EnsembleModel};
pub use forest::{train_random_forest, RandomForestModel, RandomForestParams};
pub use gbt::{
    fit_regression_tree, log_loss, train_gbt, GbtModel, GbtParams, RegressionNode, RegressionTree,
};
pub use io::{load_classifier, load_classifier_as, save_classifier, MODEL_MAGIC, MODEL_VERSION};
pub use svm::{hinge_slope, svm_objective, svm_subgradient, train_svm, LinearSvmModel, SvmParams};
pub use tree::{train_tree, DecisionTree, TreeNode, TreeParams};

use crate::error::LearnError;
use crate::ingest::Label;
use crate::scalar::Scalar;

/// Confidence above which a prediction is labeled REAL.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Row-major feature matrix with aligned labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    features: Vec<T>,
    n_features: usize,
    pub labels: Vec<Label>,
    pub row_ids: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    /// Rows must share one width and hold only finite values.
    pub fn new(rows: Vec<Vec<T>>, labels: Vec<Label>) -> Result<Self, LearnError> {
        let row_ids = (0..rows.len()).collect();
        Self::with_ids(rows, labels, row_ids)
    }

    pub fn with_ids(
        rows: Vec<Vec<T>>,
        labels: Vec<Label>,
        row_ids: Vec<usize>,
    ) -> Result<Self, LearnError> {
        if rows.len() != labels.len() || rows.len() != row_ids.len() {
            return Err(LearnError::InvalidData(format!(
                "{} rows, {} labels, {} ids",
                rows.len(),
                labels.len(),
                row_ids.len()
            )));
        }
        let n_features = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(LearnError::DimensionMismatch {
                    expected: n_features,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(LearnError::InvalidData(format!(
                    "row {i} has a non-finite value"
                )));
            }
            features.extend_from_slice(r);
        }
        Ok(Dataset {
            features,
            n_features,
            labels,
            row_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count(Label::Real) > 0 && self.count(Label::Spurious) > 0
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Copy with every feature multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Dataset {
            features: self.features.iter().map(|&v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn require_training(&self) -> Result<(), LearnError> {
        if self.n_features == 0 {
            return Err(LearnError::InvalidData("feature dimension is zero".into()));
        }
        if self.is_empty() {
            return Err(LearnError::InvalidData("no training samples".into()));
        }
        Ok(())
    }

    pub(crate) fn require_both_classes(&self) -> Result<(), LearnError> {
        self.require_training()?;
        if !self.has_both_classes() {
            return Err(LearnError::InvalidData(
                "both labels must be present".into(),
            ));
        }
        Ok(())
    }
}

/// Output of [`Classifier::predict`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: Label,
    /// Model-specific score: vote fraction (forest, ensemble), raw margin
    /// (SVM) or probability (GBT).
    pub score: T,
    /// Score mapped to [0, 1] as evidence for REAL; thresholds apply here.
    pub confidence: T,
}

impl<T: Scalar> Prediction<T> {
    /// REAL only when confidence is strictly above `threshold`; exact ties
    /// go to SPURIOUS.
    pub fn from_confidence(score: T, confidence: T, threshold: f64) -> Self {
        let label = Label::from_is_real(confidence.to_f64_lossless() > threshold);
        Prediction {
            label,
            score,
            confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    RandomForest,
    LinearSvm,
    Gbt,
    Ensemble,
    /// Predicts the training majority class; a reference baseline.
    Majority,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::RandomForest,
        ModelKind::LinearSvm,
        ModelKind::Gbt,
        ModelKind::Ensemble,
        ModelKind::Majority,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "rf",
            ModelKind::LinearSvm => "svm",
            ModelKind::Gbt => "gbt",
            ModelKind::Ensemble => "ensemble",
            ModelKind::Majority => "majority",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "Random Forests",
            ModelKind::LinearSvm => "SVM",
            ModelKind::Gbt => "XGBoost",
            ModelKind::Ensemble => "Ensemble",
            ModelKind::Majority => "Majority baseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .iter()
            .copied()
            .find(|k| k.tag() == s)
            .ok_or_else(|| {
                format!("unknown model kind `{s}` (expected rf, svm, gbt, ensemble or majority)")
            })
    }
}

/// Hyperparameters for every trainer, sharing one master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierParams {
    pub forest: RandomForestParams,
    pub svm: SvmParams,
    pub gbt: GbtParams,
}

impl ClassifierParams {
    pub fn new(seed: u64) -> Self {
        ClassifierParams {
            forest: RandomForestParams::new(seed),
            svm: SvmParams::new(seed),
            gbt: GbtParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier<T: Scalar> {
    RandomForest(RandomForestModel<T>),
    LinearSvm(LinearSvmModel<T>),
    Gbt(GbtModel<T>),
    Ensemble(EnsembleModel<T>),
    Majority { label: Label, n_features: usize },
}

impl<T: Scalar> Classifier<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::RandomForest(_) => ModelKind::RandomForest,
            Classifier::LinearSvm(_) => ModelKind::LinearSvm,
            Classifier::Gbt(_) => ModelKind::Gbt,
            Classifier::Ensemble(_) => ModelKind::Ensemble,
            Classifier::Majority { .. } => ModelKind::Majority,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::RandomForest(m) => m.n_features,
            Classifier::LinearSvm(m) => m.weights.len(),
            Classifier::Gbt(m) => m.n_features,
            Classifier::Ensemble(m) => m.n_features(),
            Classifier::Majority { n_features, .. } => *n_features,
        }
    }

    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>, LearnError> {
        self.predict_with_threshold(x, DEFAULT_THRESHOLD)
    }

    pub fn predict_with_threshold(
        &self,
        x: &[T],
        threshold: f64,
    ) -> Result<Prediction<T>, LearnError> {
        match self {
            Classifier::RandomForest(m) => m.predict_with_threshold(x, threshold),
            Classifier::LinearSvm(m) => m.predict_with_threshold(x, threshold),
            Classifier::Gbt(m) => m.predict_with_threshold(x, threshold),
            Classifier::Ensemble(m) => m.predict_with_threshold(x, threshold),
            Classifier::Majority { label, n_features } => {
                check_dim(*n_features, x)?;
                let c = if label.is_real() { T::one() } else { T::zero() };
                Ok(Prediction::from_confidence(c, c, threshold))
            }
        }
    }
}

pub fn train_majority<T: Scalar>(data: &Dataset<T>) -> Result<Classifier<T>, LearnError> {
    data.require_training()?;
    let label = Label::from_is_real(data.count(Label::Real) > data.count(Label::Spurious));
    Ok(Classifier::Majority {
        label,
        n_features: data.n_features(),
    })
}

/// Trains one classifier of `kind`; an ensemble trains all three members.
pub fn train_classifier<T: Scalar>(
    kind: ModelKind,
    data: &Dataset<T>,
    params: &ClassifierParams,
) -> Result<Classifier<T>, LearnError> {
    Ok(match kind {
        ModelKind::RandomForest => {
            Classifier::RandomForest(train_random_forest(data, &params.forest)?)
        }
        ModelKind::LinearSvm => Classifier::LinearSvm(train_svm(data, &params.svm)?),
        ModelKind::Gbt => Classifier::Gbt(train_gbt(data, &params.gbt)?),
        ModelKind::Ensemble => Classifier::Ensemble(train_ensemble(data, params)?),
        ModelKind::Majority => train_majority(data)?,
    })
}

pub(crate) fn check_dim<T>(expected: usize, x: &[T]) -> Result<(), LearnError> {
    if x.len() != expected {
        return Err(LearnError::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}

/// SplitMix64 step: derives independent per-unit seeds from a master seed.
pub(crate) fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        assert!(
            Dataset::<f64>::new(vec![vec![1.0], vec![1.0, 2.0]], vec![Label::Real; 2]).is_err()
        );
        assert!(Dataset::<f64>::new(vec![vec![f64::NAN]], vec![Label::Real]).is_err());
        assert!(Dataset::<f64>::new(vec![vec![1.0]], vec![]).is_err());
        let d = Dataset::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![Label::Real, Label::Spurious],
        )
        .unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        let s = d.subset(&[1]);
        assert_eq!(s.row_ids, vec![1]);
        assert_eq!(s.labels, vec![Label::Spurious]);
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.tag().parse::<ModelKind>().unwrap(), k);
        }
        assert!("xgboost".parse::<ModelKind>().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn majority_baseline() {
        let d = Dataset::new(
            vec![vec![0.0]; 3],
            vec![Label::Spurious, Label::Spurious, Label::Real],
        )
        .unwrap();
        let m = train_majority(&d).unwrap();
        let p = m.predict(&[5.0]).unwrap();
        assert_eq!((p.label, p.score), (Label::Spurious, 0.0));
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }
}
