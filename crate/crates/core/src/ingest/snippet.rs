use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;

use super::{LineSpan, WarningRecord};
use crate::error::IngestError;

/// Lines covered by `spans`, in span order, each physical line at most once,
/// joined with `\n`. Fails with the offending span if it runs past the text.
pub fn select_lines(text: &str, spans: &[LineSpan]) -> Result<String, (LineSpan, usize)> {
    let lines: Vec<&str> = text.lines().collect();
    let mut seen = BTreeSet::new();
    let mut picked = Vec::new();
    for &span in spans {
        if span.end() as usize > lines.len() {
            return Err((span, lines.len()));
        }
        for n in span.lines() {
            if seen.insert(n) {
                picked.push(lines[n as usize - 1]);
            }
        }
    }
    Ok(picked.join("\n"))
}

/// Reads the flagged lines of `record` from under `source_root` and stores
/// them in `record.code_block`. Invalid UTF-8 is replaced, not rejected.
pub fn extract_snippet<'r>(
    source_root: &Path,
    record: &'r mut WarningRecord,
) -> Result<&'r str, IngestError> {
    let path = source_root.join(&record.source_file);
    let bytes = std::fs::read(&path).map_err(|source| IngestError::MissingSource {
        path: path.clone(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let block = select_lines(&text, &record.line_spans).map_err(|(span, line_count)| {
        IngestError::SpanOutOfRange {
            path,
            start: span.start(),
            end: span.end(),
            line_count,
        }
    })?;
    record.code_block = block;
    Ok(&record.code_block)
}

/// Extracts every record in parallel. Returns the failures by record index;
/// failed records keep an empty code block.
pub fn fill_snippets(
    source_root: &Path,
    records: &mut [WarningRecord],
) -> Vec<(usize, IngestError)> {
    records
        .par_iter_mut()
        .enumerate()
        .filter_map(|(i, r)| extract_snippet(source_root, r).err().map(|e| (i, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Category;

    fn spans(v: &[(u32, u32)]) -> Vec<LineSpan> {
        v.iter()
            .map(|&(a, b)| LineSpan::new(a, b).unwrap())
            .collect()
    }

    fn numbered(n: usize) -> String {
        (1..=n)
            .map(|i| format!("line{i}"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn one_line_file() {
        assert_eq!(
            select_lines("int x = 0;", &spans(&[(1, 1)])).unwrap(),
            "int x = 0;"
        );
        assert_eq!(
            select_lines("int x = 0;\n", &spans(&[(1, 1)])).unwrap(),
            "int x = 0;"
        );
    }

    #[test]
    fn disjoint_and_overlapping_spans() {
        let text = numbered(10);
        assert_eq!(
            select_lines(&text, &spans(&[(3, 3), (5, 6)])).unwrap(),
            "line3\nline5\nline6"
        );
        assert_eq!(
            select_lines(&text, &spans(&[(2, 4), (3, 5)])).unwrap(),
            "line2\nline3\nline4\nline5"
        );
    }

    #[test]
    fn crlf_is_stripped() {
        assert_eq!(select_lines("a\r\nb\r\n", &spans(&[(2, 2)])).unwrap(), "b");
    }

    #[test]
    fn span_past_end() {
        let err = select_lines(&numbered(3), &spans(&[(2, 4)])).unwrap_err();
        assert_eq!(err, (LineSpan::new(2, 4).unwrap(), 3));
    }

    #[test]
    fn extraction_errors_carry_context() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("A.java"), b"one\ntwo\xff\n").unwrap();
        let mut rec = WarningRecord {
            ordinal: 0,
            source_file: "A.java".into(),
            class_name: String::new(),
            method_name: String::new(),
            vuln_type: "XSS_SERVLET".into(),
            category: Category::Xss,
            line_spans: spans(&[(2, 2)]),
            code_block: String::new(),
        };
        assert_eq!(
            extract_snippet(dir.path(), &mut rec).unwrap(),
            "two\u{fffd}"
        );

        rec.line_spans = spans(&[(1, 9)]);
        match extract_snippet(dir.path(), &mut rec) {
            Err(IngestError::SpanOutOfRange {
                line_count: 2,
                start: 1,
                end: 9,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }

        rec.source_file = "Missing.java".into();
        match extract_snippet(dir.path(), &mut rec) {
            Err(IngestError::MissingSource { path, .. }) => assert!(path.ends_with("Missing.java")),
            other => panic!("{other:?}"),
        }
    }
}
