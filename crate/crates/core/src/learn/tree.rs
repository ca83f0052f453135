//! Gini classification trees, the building block of the random forest.

use rand::seq::index::sample;
use rand::Rng;

use super::{check_dim, Dataset};
use crate::error::LearnError;
use crate::ingest::Label;
use crate::scalar::Scalar;

/// Minimum improvement in the split score that counts as a better split.
const SCORE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode<T> {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    /// Training rows that reached the leaf, as `[real, spurious]`.
    Leaf { counts: [usize; 2] },
}

/// Nodes in pre-order; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Candidate features drawn per node; clamped to the feature count.
    pub features_per_split: usize,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn leaf_counts(&self, x: &[T]) -> [usize; 2] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority label of the reached leaf, ties to SPURIOUS.
    pub fn vote(&self, x: &[T]) -> Label {
        let [real, spurious] = self.leaf_counts(x);
        Label::from_is_real(real > spurious)
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[TreeNode<T>], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[T], n_features: usize) -> Result<Label, LearnError> {
        check_dim(n_features, x)?;
        Ok(self.vote(x))
    }
}

fn counts_of<T: Scalar>(data: &Dataset<T>, rows: &[usize]) -> [usize; 2] {
    let real = rows.iter().filter(|&&i| data.labels[i].is_real()).count();
    [real, rows.len() - real]
}

/// Σ c²/n over the classes: maximizing its sum over both children is the
/// same as minimizing the size-weighted Gini impurity.
fn purity(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    ((c[0] * c[0] + c[1] * c[1]) as f64) / n
}

/// Point halfway between two distinct sorted values that still separates them.
pub(crate) fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let two = T::one() + T::one();
    let mid = lo + (hi - lo) / two;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

struct Best<T> {
    score: f64,
    feature: usize,
    threshold: T,
}

fn best_split<T: Scalar>(data: &Dataset<T>, rows: &[usize], features: &[usize]) -> Option<Best<T>> {
    let total = counts_of(data, rows);
    let parent = purity(total);
    let mut best: Option<Best<T>> = None;
    let mut sorted = rows.to_vec();
    for &f in features {
        sorted.sort_by(|&a, &b| data.row(a)[f].partial_cmp(&data.row(b)[f]).expect("finite"));
        let mut left = [0usize; 2];
        for k in 1..sorted.len() {
            let prev = sorted[k - 1];
            left[usize::from(!data.labels[prev].is_real())] += 1;
            let (lo, hi) = (data.row(prev)[f], data.row(sorted[k])[f]);
            if lo == hi {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let score = purity(left) + purity(right);
            if score <= parent + SCORE_EPS {
                continue;
            }
            if best.as_ref().is_none_or(|b| score > b.score + SCORE_EPS) {
                best = Some(Best {
                    score,
                    feature: f,
                    threshold: midpoint(lo, hi),
                });
            }
        }
    }
    best
}

fn grow<T: Scalar, R: Rng>(
    data: &Dataset<T>,
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut R,
    nodes: &mut Vec<TreeNode<T>>,
) -> usize {
    let at = nodes.len();
    let counts = counts_of(data, &rows);
    nodes.push(TreeNode::Leaf { counts });
    if depth >= params.max_depth || counts[0] == 0 || counts[1] == 0 {
        return at;
    }
    let d = data.n_features();
    let m = params.features_per_split.clamp(1, d);
    let mut features: Vec<usize> = if m == d {
        (0..d).collect()
    } else {
        sample(rng, d, m).into_vec()
    };
    // ascending order makes exact score ties go to the lowest feature index
    features.sort_unstable();
    let Some(split) = best_split(data, &rows, &features) else {
        return at;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| data.row(i)[split.feature] <= split.threshold);
    let left = grow(data, l, depth + 1, params, rng, nodes);
    let right = grow(data, r, depth + 1, params, rng, nodes);
    nodes[at] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    at
}

/// Grows one tree on `rows` of `data` (duplicates allowed, as in a bootstrap
/// sample). Splits maximize the Gini decrease over midpoints of adjacent
/// distinct values; among equal-scoring splits the lowest feature index and
/// then the lowest threshold win. A node stays a leaf when pure, at
/// `max_depth`, or when no split lowers impurity.
pub fn train_tree<T: Scalar, R: Rng>(
    data: &Dataset<T>,
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> Result<DecisionTree<T>, LearnError> {
    data.require_training()?;
    if rows.is_empty() {
        return Err(LearnError::InvalidData(
            "tree needs at least one row".into(),
        ));
    }
    let mut nodes = Vec::new();
    grow(data, rows.to_vec(), 0, params, rng, &mut nodes);
    Ok(DecisionTree { nodes })
}
