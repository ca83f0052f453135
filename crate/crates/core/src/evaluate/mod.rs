//! Scoring classifiers against ground truth, and filtering reports with them.

mod cv;
mod filter;
mod metrics;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use cv::{
    cross_validate, evaluate_holdout, evaluate_protocol, holdout_split, score_holdout,
    stratified_folds, Protocol,
};
pub use filter::{filter_report, FilterDecision, FilterSummary, FlaggedWarning};
pub use metrics::{ConfusionMatrix, EvaluationReport};

use crate::learn::ModelKind;

/// Accuracy grid of models by embedding dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonTable {
    cells: BTreeMap<(ModelKind, usize), f64>,
}

impl ComparisonTable {
    pub fn insert(&mut self, kind: ModelKind, dim: usize, accuracy: f64) {
        self.cells.insert((kind, dim), accuracy);
    }

    pub fn get(&self, kind: ModelKind, dim: usize) -> Option<f64> {
        self.cells.get(&(kind, dim)).copied()
    }

    pub fn cells(&self) -> impl Iterator<Item = (ModelKind, usize, f64)> + '_ {
        self.cells.iter().map(|(&(k, d), &a)| (k, d, a))
    }

    /// Models as rows, dimensions as columns (largest first), accuracy in
    /// percent; `-` marks a cell that was not run.
    pub fn to_text(&self) -> String {
        let mut dims: Vec<usize> = self.cells.keys().map(|&(_, d)| d).collect();
        dims.sort_unstable_by(|a, b| b.cmp(a));
        dims.dedup();
        let mut kinds: Vec<ModelKind> = self.cells.keys().map(|&(k, _)| k).collect();
        kinds.dedup();
        let mut s = format!("{:<20}", "Model");
        for d in &dims {
            let _ = write!(s, "{:>10}", format!("Dim {d}"));
        }
        s.push('\n');
        for k in kinds {
            let _ = write!(s, "{:<20}", k.display_name());
            for &d in &dims {
                match self.get(k, d) {
                    Some(a) => {
                        let _ = write!(s, "{:>10.2}", 100.0 * a);
                    }
                    None => {
                        let _ = write!(s, "{:>10}", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}
