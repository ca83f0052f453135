//! Merging flags over the config file into concrete, validated settings.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Result;

use sast_triage::embed::Hyperparams;
use sast_triage::evaluate::Protocol;
use sast_triage::learn::{ClassifierParams, ModelKind, DEFAULT_THRESHOLD};

use crate::config::FileConfig;
use crate::{EmbeddingFlags, ModelFlags, Precision};

/// A problem with the invocation rather than with the data; exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub const DEFAULT_DIMS: [usize; 3] = [10, 20, 30];
pub const DEFAULT_MODELS: [ModelKind; 4] = [
    ModelKind::RandomForest,
    ModelKind::LinearSvm,
    ModelKind::Gbt,
    ModelKind::Ensemble,
];

pub fn require_seed(flag: Option<u64>, cfg: &FileConfig) -> Result<u64> {
    match flag.or(cfg.seed) {
        Some(s) => Ok(s),
        None => usage("a seed is required: pass --seed or set `seed` in the config file"),
    }
}

pub fn workspace(flag: Option<PathBuf>, cfg: &FileConfig) -> Result<PathBuf> {
    match flag.or_else(|| cfg.workspace.clone()) {
        Some(p) => Ok(p),
        None => {
            usage("a workspace is required: pass --workspace or set `workspace` in the config file")
        }
    }
}

pub fn precision(flag: Option<Precision>, cfg: &FileConfig) -> Result<Precision> {
    match (flag, cfg.precision.as_deref()) {
        (Some(p), _) => Ok(p),
        (None, None | Some("f64")) => Ok(Precision::F64),
        (None, Some("f32")) => Ok(Precision::F32),
        (None, Some(other)) => usage(format!("precision must be f32 or f64, got `{other}`")),
    }
}

/// An input path that must exist before any stage runs.
pub fn input_path(
    flag: Option<PathBuf>,
    cfg: Option<&PathBuf>,
    what: &str,
    flag_name: &str,
) -> Result<PathBuf> {
    let Some(p) = flag.or_else(|| cfg.cloned()) else {
        return usage(format!(
            "missing {what}: pass --{flag_name} or set it in the config file"
        ));
    };
    if !p.exists() {
        return usage(format!("{what} {} does not exist", p.display()));
    }
    Ok(p)
}

pub fn existing_artifact(path: &Path, hint: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        usage(format!("{} not found; {hint}", path.display()))
    }
}

pub fn dims(flag: Option<Vec<usize>>, cfg: &FileConfig) -> Result<Vec<usize>> {
    let dims = flag
        .or_else(|| cfg.pipeline.dims.clone())
        .unwrap_or_else(|| DEFAULT_DIMS.to_vec());
    if dims.is_empty() || dims.contains(&0) {
        return usage("dimensions must be positive");
    }
    Ok(dedup(dims))
}

pub fn models(flag: Option<Vec<String>>, cfg: &FileConfig) -> Result<Vec<ModelKind>> {
    let Some(names) = flag.or_else(|| cfg.pipeline.models.clone()) else {
        return Ok(DEFAULT_MODELS.to_vec());
    };
    let mut kinds = Vec::new();
    for n in names {
        match n.trim().parse::<ModelKind>() {
            Ok(k) => kinds.push(k),
            Err(e) => return usage(e),
        }
    }
    if kinds.is_empty() {
        return usage("no models requested");
    }
    Ok(dedup(kinds))
}

fn dedup<T: PartialEq>(v: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(v.len());
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn threshold(flag: Option<f64>, cfg: &FileConfig) -> Result<f64> {
    let t = flag.or(cfg.pipeline.threshold).unwrap_or(DEFAULT_THRESHOLD);
    if !(0.0..=1.0).contains(&t) {
        return usage(format!("threshold must be in [0, 1], got {t}"));
    }
    Ok(t)
}

pub fn protocol(
    name: Option<String>,
    folds: Option<usize>,
    fraction: Option<f64>,
    cfg: &FileConfig,
) -> Result<Protocol> {
    let name = name
        .or_else(|| cfg.pipeline.protocol.clone())
        .unwrap_or_else(|| "cv".into());
    match name.as_str() {
        "cv" => {
            let folds = folds.or(cfg.pipeline.folds).unwrap_or(5);
            if folds < 2 {
                return usage(format!(
                    "cross-validation needs at least 2 folds, got {folds}"
                ));
            }
            Ok(Protocol::CrossValidation { folds })
        }
        "holdout" => {
            let test_fraction = fraction.or(cfg.pipeline.test_fraction).unwrap_or(0.2);
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return usage(format!(
                    "test fraction must be in (0, 1), got {test_fraction}"
                ));
            }
            Ok(Protocol::Holdout { test_fraction })
        }
        other => usage(format!("protocol must be `cv` or `holdout`, got `{other}`")),
    }
}

pub fn hyperparams(
    dim: usize,
    seed: u64,
    flags: &EmbeddingFlags,
    cfg: &FileConfig,
) -> Result<Hyperparams> {
    let e = &cfg.embedding;
    let mut hp = Hyperparams::new(dim, seed);
    hp.window = flags.window.or(e.window).unwrap_or(hp.window);
    hp.epochs = flags.embed_epochs.or(e.epochs).unwrap_or(hp.epochs);
    hp.negatives = flags.negatives.or(e.negatives).unwrap_or(hp.negatives);
    hp.learning_rate = flags
        .learning_rate
        .or(e.learning_rate)
        .unwrap_or(hp.learning_rate);
    hp.min_count = flags.min_count.or(e.min_count).unwrap_or(hp.min_count);
    if let Err(err) = hp.validate() {
        return usage(err.to_string());
    }
    Ok(hp)
}

pub fn classifier_params(seed: u64, flags: &ModelFlags, cfg: &FileConfig) -> ClassifierParams {
    let mut p = ClassifierParams::new(seed);
    p.forest.n_trees = flags
        .rf_trees
        .or(cfg.forest.trees)
        .unwrap_or(p.forest.n_trees);
    p.forest.max_depth = flags
        .rf_depth
        .or(cfg.forest.max_depth)
        .unwrap_or(p.forest.max_depth);
    p.forest.features_per_split = flags
        .rf_features
        .or(cfg.forest.features_per_split)
        .or(p.forest.features_per_split);
    p.svm.lambda = flags.svm_lambda.or(cfg.svm.lambda).unwrap_or(p.svm.lambda);
    p.svm.epochs = flags.svm_epochs.or(cfg.svm.epochs).unwrap_or(p.svm.epochs);
    p.gbt.shrinkage = flags
        .gbt_eta
        .or(cfg.gbt.shrinkage)
        .unwrap_or(p.gbt.shrinkage);
    p.gbt.rounds = flags.gbt_rounds.or(cfg.gbt.rounds).unwrap_or(p.gbt.rounds);
    p.gbt.max_depth = flags
        .gbt_depth
        .or(cfg.gbt.max_depth)
        .unwrap_or(p.gbt.max_depth);
    p.gbt.leaf_lambda = flags
        .gbt_lambda
        .or(cfg.gbt.leaf_lambda)
        .unwrap_or(p.gbt.leaf_lambda);
    p
}

pub fn dataset_path(ws: &Path) -> PathBuf {
    ws.join("dataset.tsv")
}

pub fn embedding_path(ws: &Path, dim: usize) -> PathBuf {
    ws.join(format!("embed-d{dim}.bin"))
}

pub fn model_path(ws: &Path, kind: ModelKind, dim: usize) -> PathBuf {
    ws.join(format!("{}-d{dim}.model", kind.tag()))
}
