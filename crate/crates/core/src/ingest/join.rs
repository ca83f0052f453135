use std::collections::HashMap;

use super::{Category, GroundTruthEntry, Label, LabeledSample, WarningRecord};

/// What the join could not match. Indices point into the inputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinReport {
    pub matched: usize,
    pub unmatched_warnings: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

/// Labels each warning from the entry with the same test name and category.
///
/// Several warnings may share one ground-truth entry.
pub fn join_labels(
    warnings: &[WarningRecord],
    truth: &[GroundTruthEntry],
) -> (Vec<LabeledSample>, JoinReport) {
    let index: HashMap<(&str, Category), usize> = truth
        .iter()
        .enumerate()
        .map(|(i, t)| ((t.test_name.as_str(), t.category), i))
        .collect();
    let mut used = vec![false; truth.len()];
    let mut samples = Vec::new();
    let mut report = JoinReport::default();
    for (i, w) in warnings.iter().enumerate() {
        match index.get(&(w.test_name(), w.category)) {
            Some(&t) => {
                used[t] = true;
                samples.push(LabeledSample {
                    warning: w.clone(),
                    label: Label::from_is_real(truth[t].is_real),
                });
            }
            None => report.unmatched_warnings.push(i),
        }
    }
    report.matched = samples.len();
    report.unmatched_truth = used
        .iter()
        .enumerate()
        .filter_map(|(i, &u)| (!u).then_some(i))
        .collect();
    (samples, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LineSpan;

    fn warning(file: &str, category: Category) -> WarningRecord {
        WarningRecord {
            ordinal: 0,
            source_file: file.into(),
            class_name: String::new(),
            method_name: String::new(),
            vuln_type: String::new(),
            category,
            line_spans: vec![LineSpan::new(1, 1).unwrap()],
            code_block: "x".into(),
        }
    }

    fn truth(name: &str, category: Category, is_real: bool) -> GroundTruthEntry {
        GroundTruthEntry {
            test_name: name.into(),
            category,
            is_real,
            cwe: 0,
        }
    }

    #[test]
    fn empty_warnings_leave_all_truth_unmatched() {
        let t = vec![
            truth("A", Category::Xss, true),
            truth("B", Category::Hash, false),
        ];
        let (s, r) = join_labels(&[], &t);
        assert!(s.is_empty());
        assert_eq!(r.unmatched_truth, vec![0, 1]);
    }

    #[test]
    fn single_pair_spurious() {
        let w = vec![warning("src/BenchmarkTest00007.java", Category::Xss)];
        let t = vec![truth("BenchmarkTest00007", Category::Xss, false)];
        let (s, r) = join_labels(&w, &t);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, Label::Spurious);
        assert!(r.unmatched_warnings.is_empty() && r.unmatched_truth.is_empty());
    }

    #[test]
    fn category_mismatch_is_reported_both_ways() {
        let w = vec![warning("BenchmarkTest00007.java", Category::SqlInjection)];
        let t = vec![truth("BenchmarkTest00007", Category::Xss, true)];
        let (s, r) = join_labels(&w, &t);
        assert!(s.is_empty());
        assert_eq!(r.unmatched_warnings, vec![0]);
        assert_eq!(r.unmatched_truth, vec![0]);
    }

    #[test]
    fn many_warnings_to_one_entry() {
        let w = vec![
            warning("T.java", Category::Xss),
            warning("T.java", Category::Xss),
        ];
        let t = vec![truth("T", Category::Xss, true)];
        let (s, r) = join_labels(&w, &t);
        assert_eq!(s.len(), 2);
        assert_eq!(r.matched, 2);
    }
}
