//! Reader for the SpotBugs / FindSecBugs `BugCollection` XML report.

use std::ops::Range;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{LineSpan, TypeMap, WarningRecord};
use crate::error::IngestError;

/// Why a `BugInstance` did not become a [`WarningRecord`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    NoSourceLine,
    UnmappedType(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedInstance {
    /// Position of the instance among all `BugInstance` elements.
    pub ordinal: usize,
    pub vuln_type: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedReport {
    pub warnings: Vec<WarningRecord>,
    pub skipped: Vec<SkippedInstance>,
    /// Byte range of every `BugInstance` element, indexed by ordinal.
    pub instance_ranges: Vec<Range<usize>>,
}

impl ParsedReport {
    pub fn instance_count(&self) -> usize {
        self.instance_ranges.len()
    }
}

#[derive(Default)]
struct InstanceBuilder {
    start: usize,
    vuln_type: String,
    class_name: Option<String>,
    method_name: Option<String>,
    spans: Vec<LineSpan>,
    source_path: Option<String>,
    class_source_path: Option<String>,
}

fn attr(e: &BytesStart<'_>, name: &[u8], offset: u64) -> Result<Option<String>, IngestError> {
    for a in e.attributes() {
        let a = a.map_err(|err| IngestError::Xml {
            offset,
            message: err.to_string(),
        })?;
        if a.key.as_ref() == name {
            let v = a.unescape_value().map_err(|err| IngestError::Xml {
                offset,
                message: err.to_string(),
            })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn span_of(e: &BytesStart<'_>, offset: u64) -> Result<Option<LineSpan>, IngestError> {
    let Some(start) = attr(e, b"start", offset)?.and_then(|s| s.trim().parse::<u32>().ok()) else {
        return Ok(None);
    };
    let end = attr(e, b"end", offset)?
        .and_then(|s| s.trim().parse::<u32>().ok())
        .unwrap_or(start);
    Ok(LineSpan::new(start, end))
}

fn path_from_class(class_name: &str) -> String {
    let outer = class_name.split('$').next().unwrap_or(class_name);
    format!("{}.java", outer.replace('.', "/"))
}

/// Parses a `BugCollection` report into warnings, keeping report order.
///
/// Only `SourceLine` elements that are direct children of a `BugInstance`
/// contribute line spans; the ones nested under `Class` or `Method` describe
/// the whole enclosing declaration.
pub fn parse_report(bytes: &[u8], type_map: &TypeMap) -> Result<ParsedReport, IngestError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(false);

    let mut out = ParsedReport::default();
    // Element names from the root down to the current element.
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut current: Option<InstanceBuilder> = None;

    loop {
        let before = reader.buffer_position();
        let event = reader.read_event().map_err(|err| IngestError::Xml {
            offset: reader.error_position(),
            message: err.to_string(),
        })?;
        let after = reader.buffer_position();
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name().as_ref().to_vec();
                let depth = stack.len();
                if depth == 0 && name != b"BugCollection" {
                    return Err(IngestError::Xml {
                        offset: before,
                        message: format!(
                            "root element is `{}`, expected `BugCollection`",
                            String::from_utf8_lossy(&name)
                        ),
                    });
                }
                if depth == 1 && name == b"BugInstance" {
                    current = Some(InstanceBuilder {
                        start: before as usize,
                        vuln_type: attr(e, b"type", before)?.unwrap_or_default(),
                        ..Default::default()
                    });
                } else if let Some(inst) = current.as_mut() {
                    let parent = stack.last().map(Vec::as_slice);
                    match (depth, name.as_slice(), parent) {
                        (2, b"Class", _) if inst.class_name.is_none() => {
                            inst.class_name = attr(e, b"classname", before)?;
                        }
                        (2, b"Method", _) if inst.method_name.is_none() => {
                            inst.method_name = attr(e, b"name", before)?;
                        }
                        (2, b"SourceLine", _) => {
                            if let Some(span) = span_of(e, before)? {
                                inst.spans.push(span);
                                if inst.source_path.is_none() {
                                    inst.source_path = attr(e, b"sourcepath", before)?;
                                }
                            }
                        }
                        (3, b"SourceLine", Some(b"Class")) if inst.class_source_path.is_none() => {
                            inst.class_source_path = attr(e, b"sourcepath", before)?;
                        }
                        _ => {}
                    }
                }
                if is_empty {
                    if depth == 1 && name == b"BugInstance" {
                        let inst = current.take().expect("instance just opened");
                        finish_instance(&mut out, inst, after as usize, type_map);
                    }
                } else {
                    stack.push(name);
                }
            }
            Event::End(_) => {
                let name = stack.pop().unwrap_or_default();
                if stack.len() == 1 && name == b"BugInstance" {
                    if let Some(inst) = current.take() {
                        finish_instance(&mut out, inst, after as usize, type_map);
                    }
                }
            }
            Event::Eof => {
                if let Some(open) = stack.last() {
                    return Err(IngestError::Xml {
                        offset: after,
                        message: format!(
                            "unexpected end of input inside `{}`",
                            String::from_utf8_lossy(open)
                        ),
                    });
                }
                break;
            }
            _ => {}
        }
    }
    Ok(out)
}

fn finish_instance(out: &mut ParsedReport, inst: InstanceBuilder, end: usize, map: &TypeMap) {
    let ordinal = out.instance_ranges.len();
    out.instance_ranges.push(inst.start..end);
    if inst.spans.is_empty() {
        out.skipped.push(SkippedInstance {
            ordinal,
            vuln_type: inst.vuln_type,
            reason: SkipReason::NoSourceLine,
        });
        return;
    }
    let Some(category) = map.category(&inst.vuln_type) else {
        out.skipped.push(SkippedInstance {
            ordinal,
            reason: SkipReason::UnmappedType(inst.vuln_type.clone()),
            vuln_type: inst.vuln_type,
        });
        return;
    };
    let class_name = inst.class_name.unwrap_or_default();
    let source_file = inst
        .source_path
        .or(inst.class_source_path)
        .unwrap_or_else(|| path_from_class(&class_name));
    out.warnings.push(WarningRecord {
        ordinal,
        source_file,
        class_name,
        method_name: inst.method_name.unwrap_or_default(),
        vuln_type: inst.vuln_type,
        category,
        line_spans: inst.spans,
        code_block: String::new(),
    });
}
