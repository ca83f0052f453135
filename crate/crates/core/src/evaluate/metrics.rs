use std::fmt::Write as _;

use crate::ingest::Label;

/// Predicted × actual counts over {REAL, SPURIOUS}.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    /// Predicted REAL, actually REAL.
    pub tp: usize,
    /// Predicted REAL, actually SPURIOUS: a false alarm that survived.
    pub fp: usize,
    /// Predicted SPURIOUS, actually SPURIOUS.
    pub tn: usize,
    /// Predicted SPURIOUS, actually REAL.
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(actual: &[Label], predicted: &[Label]) -> Self {
        assert_eq!(actual.len(), predicted.len(), "label vectors must align");
        let mut m = ConfusionMatrix::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            m.add(a, p);
        }
        m
    }

    pub fn add(&mut self, actual: Label, predicted: Label) {
        match (predicted, actual) {
            (Label::Real, Label::Real) => self.tp += 1,
            (Label::Real, Label::Spurious) => self.fp += 1,
            (Label::Spurious, Label::Spurious) => self.tn += 1,
            (Label::Spurious, Label::Real) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn correct(&self) -> usize {
        self.tp + self.tn
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Classification metrics for one model over one set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// `None` when undefined (no predicted / no actual members of the class).
    pub precision_real: Option<f64>,
    pub recall_real: Option<f64>,
    pub precision_spurious: Option<f64>,
    pub recall_spurious: Option<f64>,
    /// SPURIOUS samples presented before filtering.
    pub fp_before: usize,
    /// SPURIOUS samples the classifier let through (predicted REAL).
    pub fp_after: usize,
    pub fp_rate_before: f64,
    pub fp_rate_after: f64,
    /// Held-out accuracy per fold; empty outside cross-validation.
    pub fold_accuracies: Vec<f64>,
}

impl EvaluationReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let c = confusion;
        let total = c.total();
        let fp_before = c.fp + c.tn;
        EvaluationReport {
            confusion: c,
            accuracy: ratio(c.correct(), total).unwrap_or(0.0),
            precision_real: ratio(c.tp, c.tp + c.fp),
            recall_real: ratio(c.tp, c.tp + c.fn_),
            precision_spurious: ratio(c.tn, c.tn + c.fn_),
            recall_spurious: ratio(c.tn, c.tn + c.fp),
            fp_before,
            fp_after: c.fp,
            fp_rate_before: ratio(fp_before, total).unwrap_or(0.0),
            fp_rate_after: ratio(c.fp, total).unwrap_or(0.0),
            fold_accuracies: Vec::new(),
        }
    }

    pub fn from_pairs(actual: &[Label], predicted: &[Label]) -> Self {
        Self::from_confusion(ConfusionMatrix::from_pairs(actual, predicted))
    }

    /// `key=value` lines; undefined metrics are written as `undefined`.
    pub fn to_key_values(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| v.to_string());
        let c = &self.confusion;
        let mut s = String::new();
        let _ = writeln!(s, "accuracy={}", self.accuracy);
        let _ = writeln!(s, "confusion.tp={}", c.tp);
        let _ = writeln!(s, "confusion.fp={}", c.fp);
        let _ = writeln!(s, "confusion.tn={}", c.tn);
        let _ = writeln!(s, "confusion.fn={}", c.fn_);
        let _ = writeln!(s, "precision.real={}", opt(self.precision_real));
        let _ = writeln!(s, "recall.real={}", opt(self.recall_real));
        let _ = writeln!(s, "precision.spurious={}", opt(self.precision_spurious));
        let _ = writeln!(s, "recall.spurious={}", opt(self.recall_spurious));
        let _ = writeln!(s, "fp_before={}", self.fp_before);
        let _ = writeln!(s, "fp_after={}", self.fp_after);
        let _ = writeln!(s, "fp_rate_before={}", self.fp_rate_before);
        let _ = writeln!(s, "fp_rate_after={}", self.fp_rate_after);
        let folds: Vec<String> = self.fold_accuracies.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "fold_accuracies={}", folds.join(","));
        s
    }

    pub fn to_table(&self) -> String {
        let pct = |v: Option<f64>| {
            v.map_or_else(|| "undefined".to_string(), |v| format!("{:.2}%", 100.0 * v))
        };
        let c = &self.confusion;
        let mut s = String::new();
        let _ = writeln!(s, "                 actual REAL  actual SPURIOUS");
        let _ = writeln!(s, "pred REAL        {:>11}  {:>15}", c.tp, c.fp);
        let _ = writeln!(s, "pred SPURIOUS    {:>11}  {:>15}", c.fn_, c.tn);
        let _ = writeln!(s);
        let _ = writeln!(s, "accuracy            {}", pct(Some(self.accuracy)));
        let _ = writeln!(s, "precision REAL      {}", pct(self.precision_real));
        let _ = writeln!(s, "recall REAL         {}", pct(self.recall_real));
        let _ = writeln!(s, "precision SPURIOUS  {}", pct(self.precision_spurious));
        let _ = writeln!(s, "recall SPURIOUS     {}", pct(self.recall_spurious));
        let _ = writeln!(
            s,
            "false positives     {} -> {} ({} -> {})",
            self.fp_before,
            self.fp_after,
            pct(Some(self.fp_rate_before)),
            pct(Some(self.fp_rate_after))
        );
        if !self.fold_accuracies.is_empty() {
            let folds: Vec<String> = self
                .fold_accuracies
                .iter()
                .map(|a| format!("{:.4}", a))
                .collect();
            let _ = writeln!(s, "fold accuracies     {}", folds.join(" "));
        }
        s
    }
}
