use std::collections::HashMap;

use super::{Category, GroundTruthEntry};
use crate::error::IngestError;

fn is_header(first_field: &str) -> bool {
    matches!(
        first_field.to_ascii_lowercase().as_str(),
        "test_name" | "test name" | "testname"
    )
}

/// Parses an expected-results CSV: `test_name,category,is_real,cwe` per line.
///
/// `#` lines, blank lines and a leading `test_name,...` header are ignored.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruthEntry>, IngestError> {
    let mut out = Vec::new();
    let mut seen: HashMap<(String, Category), usize> = HashMap::new();
    let mut saw_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !saw_data && is_header(fields[0]) {
            saw_data = true;
            continue;
        }
        saw_data = true;
        let err = |message: String| IngestError::Truth {
            line: line_no,
            message,
        };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", fields.len())));
        }
        let category = fields[1]
            .parse::<Category>()
            .map_err(|e| err(e.to_string()))?;
        let is_real = match fields[2].to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(err(format!(
                    "third column must be true or false, found `{other}`"
                )))
            }
        };
        let cwe = fields[3]
            .parse::<u32>()
            .map_err(|_| err(format!("cwe must be an integer, found `{}`", fields[3])))?;
        let key = (fields[0].to_string(), category);
        if seen.insert(key, out.len()).is_some() {
            return Err(IngestError::DuplicateTruth {
                line: line_no,
                test_name: fields[0].to_string(),
                category: category.to_string(),
            });
        }
        out.push(GroundTruthEntry {
            test_name: fields[0].to_string(),
            category,
            is_real,
            cwe,
        });
    }
    Ok(out)
}
