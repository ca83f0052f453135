//! Tab-separated labeled dataset file.
//!
//! ```text
//! #sast-triage-dataset v1
//! <source_file>\t<category>\t<vuln_type>\t<label>\t<spans>\t<code_block>
//! ```
//!
//! `spans` is a comma-separated list of `start-end`. Text fields escape
//! backslash, newline, carriage return and tab as `\\`, `\n`, `\r`, `\t`.

use super::{Label, LabeledSample, LineSpan, WarningRecord};
use crate::error::IngestError;

pub const DATASET_HEADER: &str = "#sast-triage-dataset v1";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            other => {
                return Err(format!(
                    "bad escape `\\{}`",
                    other.map(String::from).unwrap_or_default()
                ))
            }
        }
    }
    Ok(out)
}

pub fn write_dataset(samples: &[LabeledSample]) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for s in samples {
        let w = &s.warning;
        let spans = w
            .line_spans
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            escape(&w.source_file),
            w.category,
            escape(&w.vuln_type),
            s.label,
            spans,
            escape(&w.code_block)
        ));
    }
    out
}

fn parse_spans(field: &str) -> Result<Vec<LineSpan>, String> {
    field
        .split(',')
        .map(|part| {
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| format!("bad span `{part}`"))?;
            let a = a.parse::<u32>().map_err(|_| format!("bad span `{part}`"))?;
            let b = b.parse::<u32>().map_err(|_| format!("bad span `{part}`"))?;
            LineSpan::new(a, b).ok_or_else(|| format!("invalid span `{part}`"))
        })
        .collect()
}

pub fn read_dataset(text: &str) -> Result<Vec<LabeledSample>, IngestError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DATASET_HEADER => {}
        other => {
            return Err(IngestError::Dataset {
                line: 1,
                message: format!(
                    "expected header `{DATASET_HEADER}`, found `{}`",
                    other.unwrap_or_default()
                ),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| IngestError::Dataset {
            line: line_no,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", f.len())));
        }
        let warning = WarningRecord {
            ordinal: out.len(),
            source_file: unescape(f[0]).map_err(err)?,
            class_name: String::new(),
            method_name: String::new(),
            category: f[1]
                .parse()
                .map_err(|e: super::UnknownCategory| err(e.to_string()))?,
            vuln_type: unescape(f[2]).map_err(err)?,
            line_spans: parse_spans(f[4]).map_err(err)?,
            code_block: unescape(f[5]).map_err(err)?,
        };
        let label = f[3].parse::<Label>().map_err(err)?;
        out.push(LabeledSample { warning, label });
    }
    Ok(out)
}
