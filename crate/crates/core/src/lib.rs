//! Learned false-positive filtering for SAST reports.
//!
//! The pipeline reads a SpotBugs/FindSecBugs report and the benchmark's
//! expected results, pulls the flagged lines out of the source tree, embeds
//! them with a skip-gram model trained on the code itself, and classifies the
//! averaged vectors as real findings or false alarms.

mod codec;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod learn;
pub mod scalar;
pub mod tokenize;

pub use error::{EmbedError, Error, EvalError, FormatError, IngestError, LearnError};
pub use ingest::{Category, GroundTruthEntry, Label, LabeledSample, LineSpan, WarningRecord};
pub use scalar::Scalar;
pub use tokenize::{tokenize, TokenSequence};

pub use embed::{Hyperparams, Vocabulary};
pub use evaluate::{ComparisonTable, ConfusionMatrix, EvaluationReport, FilterSummary, Protocol};
pub use learn::{ClassifierParams, ModelKind, Prediction};

pub type EmbeddingModel64 = embed::EmbeddingModel<f64>;
pub type EmbeddingModel32 = embed::EmbeddingModel<f32>;
pub type Dataset64 = learn::Dataset<f64>;
pub type Dataset32 = learn::Dataset<f32>;
pub type Classifier64 = learn::Classifier<f64>;
pub type Classifier32 = learn::Classifier<f32>;
