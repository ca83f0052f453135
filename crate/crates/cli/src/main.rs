//! `sast-triage`: ingest a scanner report, train embedding and classifier
//! models, evaluate them, and filter new reports.
//!
//! Exit status: 0 on success, 2 on a usage error (bad flags, missing inputs
//! or settings), 1 when a pipeline stage fails.

mod commands;
mod config;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use settings::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "sast-triage",
    version,
    about = "Learned false-positive filter for SAST reports"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory that receives every artifact.
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    /// Master seed; required by `train` and `evaluate`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Floating-point width of models.
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a report and ground truth into a labeled dataset.
    Ingest(IngestArgs),
    /// Train embeddings and classifiers on the whole dataset.
    Train(TrainArgs),
    /// Score classifiers by cross-validation or holdout.
    Evaluate(EvaluateArgs),
    /// Remove predicted false positives from a report.
    Filter(FilterArgs),
    /// Show the tokens (and optionally the feature vector) of one sample.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Expected-results CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory the report's source paths are relative to.
    #[arg(long)]
    pub source_root: Option<PathBuf>,
    /// Replacement bug-type to category table.
    #[arg(long)]
    pub type_map: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct EmbeddingFlags {
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub embed_epochs: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_count: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct ModelFlags {
    #[arg(long)]
    pub rf_trees: Option<usize>,
    #[arg(long)]
    pub rf_depth: Option<usize>,
    #[arg(long)]
    pub rf_features: Option<usize>,
    #[arg(long)]
    pub svm_lambda: Option<f64>,
    #[arg(long)]
    pub svm_epochs: Option<usize>,
    #[arg(long)]
    pub gbt_eta: Option<f64>,
    #[arg(long)]
    pub gbt_rounds: Option<usize>,
    #[arg(long)]
    pub gbt_depth: Option<usize>,
    #[arg(long)]
    pub gbt_lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Embedding dimensions, e.g. `10,20,30`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Classifiers: rf, svm, gbt, ensemble.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    #[command(flatten)]
    pub embedding: EmbeddingFlags,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// `cv` (stratified k-fold) or `holdout`.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Also score the majority-class predictor.
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub source_root: Option<PathBuf>,
    #[arg(long)]
    pub type_map: Option<PathBuf>,
    /// Trained classifier to apply.
    #[arg(long)]
    pub model: Option<String>,
    /// Embedding dimension of the model.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Keep a warning when its confidence is at least this.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Row of the dataset file, counting from 0.
    #[arg(long)]
    pub sample: usize,
    /// Also print the averaged embedding at this dimension.
    #[arg(long)]
    pub dim: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
