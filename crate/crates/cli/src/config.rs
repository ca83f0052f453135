//! Optional TOML configuration. Every key mirrors a command-line flag, and
//! flags always win. Relative paths are resolved against the file's directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workspace: Option<PathBuf>,
    pub threads: Option<usize>,
    pub precision: Option<String>,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub gbt: GbtSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub report: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub source_root: Option<PathBuf>,
    pub type_map: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub dims: Option<Vec<usize>>,
    pub models: Option<Vec<String>>,
    pub threshold: Option<f64>,
    pub protocol: Option<String>,
    pub folds: Option<usize>,
    pub test_fraction: Option<f64>,
    pub baseline: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    pub window: Option<usize>,
    pub epochs: Option<usize>,
    pub negatives: Option<usize>,
    pub learning_rate: Option<f64>,
    pub min_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestSection {
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub features_per_split: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmSection {
    pub lambda: Option<f64>,
    pub epochs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbtSection {
    pub shrinkage: Option<f64>,
    pub rounds: Option<usize>,
    pub max_depth: Option<usize>,
    pub leaf_lambda: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.workspace);
        rebase(&mut cfg.paths.report);
        rebase(&mut cfg.paths.truth);
        rebase(&mut cfg.paths.source_root);
        rebase(&mut cfg.paths.type_map);
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triage.toml");
        std::fs::write(
            &path,
            "seed = 3\nworkspace = \"work\"\n[paths]\nreport = \"/abs/report.xml\"\ntruth = \"t.csv\"\n[pipeline]\ndims = [10, 20]\n[gbt]\nrounds = 7\n",
        )
        .unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.workspace, Some(dir.path().join("work")));
        assert_eq!(cfg.paths.report, Some(PathBuf::from("/abs/report.xml")));
        assert_eq!(cfg.paths.truth, Some(dir.path().join("t.csv")));
        assert_eq!(cfg.pipeline.dims, Some(vec![10, 20]));
        assert_eq!(cfg.gbt.rounds, Some(7));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triage.toml");
        std::fs::write(&path, "sed = 3\n").unwrap();
        assert!(FileConfig::load(&path).is_err());
    }
}
