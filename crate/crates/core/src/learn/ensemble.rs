use super::{
    check_dim, train_gbt, train_random_forest, train_svm, ClassifierParams, Dataset, GbtModel,
    LinearSvmModel, Prediction, RandomForestModel, DEFAULT_THRESHOLD,
};
use crate::error::LearnError;
use crate::ingest::Label;
use crate::scalar::Scalar;

/// Majority vote of a random forest, a linear SVM and a boosted model.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel<T> {
    pub forest: RandomForestModel<T>,
    pub svm: LinearSvmModel<T>,
    pub gbt: GbtModel<T>,
}

impl<T: Scalar> EnsembleModel<T> {
    /// Members must agree on the feature dimension.
    pub fn new(
        forest: RandomForestModel<T>,
        svm: LinearSvmModel<T>,
        gbt: GbtModel<T>,
    ) -> Result<Self, LearnError> {
        let d = forest.n_features;
        for found in [svm.weights.len(), gbt.n_features] {
            if found != d {
                return Err(LearnError::DimensionMismatch { expected: d, found });
            }
        }
        Ok(EnsembleModel { forest, svm, gbt })
    }

    pub fn n_features(&self) -> usize {
        self.forest.n_features
    }

    /// Member labels at their own decision boundaries, in forest, SVM, GBT order.
    pub fn votes(&self, x: &[T]) -> Result<[Label; 3], LearnError> {
        check_dim(self.n_features(), x)?;
        Ok([
            self.forest
                .predict_with_threshold(x, DEFAULT_THRESHOLD)?
                .label,
            self.svm.predict_with_threshold(x, DEFAULT_THRESHOLD)?.label,
            self.gbt.predict_with_threshold(x, DEFAULT_THRESHOLD)?.label,
        ])
    }

    /// Score is the fraction of members voting REAL; at the default threshold
    /// the label is the majority vote.
    pub fn predict_with_threshold(
        &self,
        x: &[T],
        threshold: f64,
    ) -> Result<Prediction<T>, LearnError> {
        let real = self.votes(x)?.iter().filter(|l| l.is_real()).count();
        let frac = T::from_usize_lossy(real) / T::from_usize_lossy(3);
        Ok(Prediction::from_confidence(frac, frac, threshold))
    }
}

pub fn train_ensemble<T: Scalar>(
    data: &Dataset<T>,
    params: &ClassifierParams,
) -> Result<EnsembleModel<T>, LearnError> {
    EnsembleModel::new(
        train_random_forest(data, &params.forest)?,
        train_svm(data, &params.svm)?,
        train_gbt(data, &params.gbt)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::tree::{DecisionTree, TreeNode};

    /// Members with fixed outputs: forest votes by `real_trees` of 1 tree,
    /// SVM by bias sign, GBT by base score sign.
    pub(crate) fn fixed(forest_real: bool, svm_real: bool, gbt_real: bool) -> EnsembleModel<f64> {
        let counts = if forest_real { [1, 0] } else { [0, 1] };
        let forest = RandomForestModel {
            trees: vec![DecisionTree {
                nodes: vec![TreeNode::Leaf { counts }],
            }],
            n_trees: 1,
            max_depth: 0,
            features_per_split: 1,
            n_features: 1,
            seed: 0,
            constant: None,
        };
        let svm = LinearSvmModel {
            weights: vec![0.0],
            bias: if svm_real { 1.0 } else { -1.0 },
            lambda: 1.0,
            epochs: 0,
            seed: 0,
        };
        let gbt = GbtModel {
            trees: vec![],
            shrinkage: 0.1,
            n_rounds: 0,
            max_depth: 0,
            leaf_lambda: 1.0,
            base_score: if gbt_real { 1.0 } else { -1.0 },
            n_features: 1,
            early_stopped: None,
            loss_history: vec![],
        };
        EnsembleModel::new(forest, svm, gbt).unwrap()
    }

    #[test]
    fn majority_rule() {
        let p = fixed(true, true, true)
            .predict_with_threshold(&[0.0], 0.5)
            .unwrap();
        assert_eq!((p.label, p.score), (Label::Real, 1.0));
        let p = fixed(true, true, false)
            .predict_with_threshold(&[0.0], 0.5)
            .unwrap();
        assert_eq!((p.label, p.score), (Label::Real, 2.0 / 3.0));
        let p = fixed(false, false, true)
            .predict_with_threshold(&[0.0], 0.5)
            .unwrap();
        assert_eq!((p.label, p.score), (Label::Spurious, 1.0 / 3.0));
    }

    #[test]
    fn member_dimensions_must_agree() {
        let mut e = fixed(true, true, true);
        e.svm.weights.push(0.0);
        assert!(matches!(
            EnsembleModel::new(e.forest, e.svm, e.gbt),
            Err(LearnError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }
}
