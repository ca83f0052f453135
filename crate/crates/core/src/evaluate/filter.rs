//! Applying a trained model to a scanner report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::embed::{embed_average, EmbeddingModel};
use crate::error::{EvalError, LearnError};
use crate::ingest::{extract_snippet, parse_report, Category, SkipReason, TypeMap};
use crate::learn::Classifier;
use crate::scalar::Scalar;
use crate::tokenize::tokenize;

/// A warning the filter could not score; it is always kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlaggedWarning {
    pub ordinal: usize,
    pub vuln_type: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDecision {
    pub ordinal: usize,
    pub category: Category,
    pub confidence: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterSummary {
    pub threshold: f64,
    /// Scored and kept.
    pub kept: usize,
    /// Scored below the threshold and removed.
    pub dropped: usize,
    pub flagged: Vec<FlaggedWarning>,
    /// `(kept, dropped)` per category.
    pub per_category: BTreeMap<Category, (usize, usize)>,
    pub decisions: Vec<FilterDecision>,
}

impl FilterSummary {
    pub fn total(&self) -> usize {
        self.kept + self.dropped + self.flagged.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "threshold={}", self.threshold);
        let _ = writeln!(s, "warnings={}", self.total());
        let _ = writeln!(s, "kept={}", self.kept);
        let _ = writeln!(s, "dropped={}", self.dropped);
        let _ = writeln!(s, "flagged={}", self.flagged.len());
        for (c, (k, d)) in &self.per_category {
            let _ = writeln!(s, "category.{c}.kept={k}");
            let _ = writeln!(s, "category.{c}.dropped={d}");
        }
        for f in &self.flagged {
            let _ = writeln!(s, "flagged.{}={} {}", f.ordinal, f.vuln_type, f.reason);
        }
        s
    }
}

/// Removes the byte ranges from `doc`, along with the whitespace before each.
fn remove_ranges(doc: &[u8], ranges: &[std::ops::Range<usize>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(doc.len());
    let mut at = 0;
    for r in ranges {
        let mut start = r.start;
        while start > at && doc[start - 1].is_ascii_whitespace() {
            start -= 1;
        }
        out.extend_from_slice(&doc[at..start]);
        at = r.end;
    }
    out.extend_from_slice(&doc[at..]);
    out
}

/// Scores every warning in the report and drops those whose confidence is
/// below `threshold`. The output is the input document with the dropped
/// `BugInstance` elements cut out. Warnings that cannot be mapped or
/// extracted are kept and listed as flagged.
pub fn filter_report<T: Scalar>(
    report: &[u8],
    source_root: &Path,
    type_map: &TypeMap,
    embedding: &EmbeddingModel<T>,
    classifier: &Classifier<T>,
    threshold: f64,
) -> Result<(Vec<u8>, FilterSummary), EvalError> {
    if embedding.dim() != classifier.n_features() {
        return Err(LearnError::DimensionMismatch {
            expected: classifier.n_features(),
            found: embedding.dim(),
        }
        .into());
    }
    let parsed = parse_report(report, type_map)?;
    let mut summary = FilterSummary {
        threshold,
        ..Default::default()
    };
    for s in &parsed.skipped {
        let reason = match &s.reason {
            SkipReason::NoSourceLine => "no source line".to_string(),
            SkipReason::UnmappedType(t) => format!("unmapped type {t}"),
        };
        summary.flagged.push(FlaggedWarning {
            ordinal: s.ordinal,
            vuln_type: s.vuln_type.clone(),
            reason,
        });
    }

    let scored: Vec<Result<FilterDecision, FlaggedWarning>> = parsed
        .warnings
        .par_iter()
        .map(|w| {
            let mut w = w.clone();
            if let Err(e) = extract_snippet(source_root, &mut w) {
                return Err(FlaggedWarning {
                    ordinal: w.ordinal,
                    vuln_type: w.vuln_type,
                    reason: e.to_string(),
                });
            }
            let features = embed_average(embedding, &tokenize(&w.code_block));
            let p = classifier
                .predict_with_threshold(&features.values, threshold)
                .expect("dimensions checked above");
            let confidence = p.confidence.to_f64_lossless();
            Ok(FilterDecision {
                ordinal: w.ordinal,
                category: w.category,
                confidence,
                kept: confidence >= threshold,
            })
        })
        .collect();

    let mut dropped_ranges = Vec::new();
    for r in scored {
        match r {
            Ok(d) => {
                let entry = summary.per_category.entry(d.category).or_default();
                if d.kept {
                    summary.kept += 1;
                    entry.0 += 1;
                } else {
                    summary.dropped += 1;
                    entry.1 += 1;
                    dropped_ranges.push(parsed.instance_ranges[d.ordinal].clone());
                }
                summary.decisions.push(d);
            }
            Err(f) => summary.flagged.push(f),
        }
    }
    summary.flagged.sort_by_key(|f| f.ordinal);
    Ok((remove_ranges(report, &dropped_ranges), summary))
}
