use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{train_tree, DecisionTree, TreeParams};
use super::{check_dim, derive_seed, Dataset, Prediction};
use crate::error::LearnError;
use crate::ingest::Label;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// `None` means ⌈√d⌉.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl RandomForestParams {
    /// 100 trees of depth at most 12, ⌈√d⌉ features per split.
    pub fn new(seed: u64) -> Self {
        RandomForestParams {
            n_trees: 100,
            max_depth: 12,
            features_per_split: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel<T> {
    pub trees: Vec<DecisionTree<T>>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub features_per_split: usize,
    pub n_features: usize,
    pub seed: u64,
    /// Set when the training data held a single class (or one row), so the
    /// forest can only ever predict that class.
    pub constant: Option<Label>,
}

impl<T: Scalar> RandomForestModel<T> {
    /// Number of trees voting REAL.
    pub fn real_votes(&self, x: &[T]) -> usize {
        self.trees.iter().filter(|t| t.vote(x).is_real()).count()
    }

    pub fn predict_with_threshold(
        &self,
        x: &[T],
        threshold: f64,
    ) -> Result<Prediction<T>, LearnError> {
        check_dim(self.n_features, x)?;
        let frac = T::from_usize_lossy(self.real_votes(x)) / T::from_usize_lossy(self.trees.len());
        Ok(Prediction::from_confidence(frac, frac, threshold))
    }
}

/// Bagged Gini trees. Tree `i` draws its bootstrap sample and split features
/// from its own stream seeded by `(seed, i)`, so the forest is identical
/// however many threads build it.
pub fn train_random_forest<T: Scalar>(
    data: &Dataset<T>,
    params: &RandomForestParams,
) -> Result<RandomForestModel<T>, LearnError> {
    data.require_training()?;
    if params.n_trees == 0 {
        return Err(LearnError::InvalidParameter(
            "n_trees must be positive".into(),
        ));
    }
    let d = data.n_features();
    let features_per_split = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        features_per_split,
    };
    let n = data.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, i as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            train_tree(data, &rows, &tree_params, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let constant = if n < 2 || !data.has_both_classes() {
        Some(data.labels[0])
    } else {
        None
    };
    Ok(RandomForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        features_per_split,
        n_features: d,
        seed: params.seed,
        constant,
    })
}
