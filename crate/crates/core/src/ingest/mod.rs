//! Report, ground-truth and source ingestion, and the labeled dataset they join into.

mod category;
mod dataset;
mod join;
mod report;
mod snippet;
mod truth;

use std::fmt;
use std::str::FromStr;

pub use category::{Category, TypeMap, UnknownCategory};
pub use dataset::{read_dataset, write_dataset, DATASET_HEADER};
pub use join::{join_labels, JoinReport};
pub use report::{parse_report, ParsedReport, SkipReason, SkippedInstance};
pub use snippet::{extract_snippet, fill_snippets, select_lines};
pub use truth::parse_ground_truth;

use crate::tokenize::{tokenize, TokenSequence};

/// Binary classification target: a real vulnerability or a false alarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Real,
    Spurious,
}

impl Label {
    pub fn from_is_real(is_real: bool) -> Self {
        if is_real {
            Label::Real
        } else {
            Label::Spurious
        }
    }

    pub fn is_real(self) -> bool {
        self == Label::Real
    }

    /// +1 for REAL, -1 for SPURIOUS.
    pub fn sign(self) -> f64 {
        if self.is_real() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "REAL",
            Label::Spurious => "SPURIOUS",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "REAL" => Ok(Label::Real),
            "SPURIOUS" => Ok(Label::Spurious),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Inclusive, 1-based line range reported for a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineSpan {
    start: u32,
    end: u32,
}

impl LineSpan {
    /// `None` unless `1 <= start <= end`.
    pub fn new(start: u32, end: u32) -> Option<Self> {
        (start >= 1 && end >= start).then_some(LineSpan { start, end })
    }

    pub fn start(self) -> u32 {
        self.start
    }

    pub fn end(self) -> u32 {
        self.end
    }

    pub fn lines(self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }
}

impl fmt::Display for LineSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// One scanner finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarningRecord {
    /// Index of the originating `BugInstance` in the report (row index when
    /// read back from a dataset file).
    pub ordinal: usize,
    pub source_file: String,
    pub class_name: String,
    pub method_name: String,
    pub vuln_type: String,
    pub category: Category,
    /// Non-empty, in report order.
    pub line_spans: Vec<LineSpan>,
    /// Empty until [`extract_snippet`] runs.
    pub code_block: String,
}

impl WarningRecord {
    /// File name without directory or extension; the benchmark test name.
    pub fn test_name(&self) -> &str {
        let base = self
            .source_file
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or(&self.source_file);
        match base.rfind('.') {
            Some(i) if i > 0 => &base[..i],
            _ => base,
        }
    }
}

/// One expected-results row: whether `test_name` really has a `category` flaw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthEntry {
    pub test_name: String,
    pub category: Category,
    pub is_real: bool,
    pub cwe: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub warning: WarningRecord,
    pub label: Label,
}

impl LabeledSample {
    pub fn tokens(&self) -> TokenSequence {
        tokenize(&self.warning.code_block)
    }
}
