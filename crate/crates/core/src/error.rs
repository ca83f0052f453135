use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("ground truth line {line}: {message}")]
    Truth { line: usize, message: String },
    #[error("ground truth line {line}: duplicate entry ({test_name}, {category})")]
    DuplicateTruth {
        line: usize,
        test_name: String,
        category: String,
    },
    #[error("type map line {line}: {message}")]
    TypeMap { line: usize, message: String },
    #[error("cannot read source file {path}: {source}")]
    MissingSource {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("span {start}-{end} exceeds {path} ({line_count} lines)")]
    SpanOutOfRange {
        path: PathBuf,
        start: u32,
        end: u32,
        line_count: usize,
    },
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
}

/// Errors from reading a versioned model container.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("empty model payload")]
    Empty,
    #[error("payload truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("not a model file: expected header `{expected}`, found `{found}`")]
    BadMagic { expected: String, found: String },
    #[error("unsupported version: expected {expected}, found {found}")]
    Version { expected: String, found: String },
    #[error("model kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("scalar width mismatch: expected {expected} bytes, found {found}")]
    ScalarWidth { expected: u8, found: u8 },
    #[error("corrupt payload: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("vocabulary is empty after min-count filtering")]
    EmptyVocabulary,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("feature dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Folds(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Union of the module errors, for callers driving the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
