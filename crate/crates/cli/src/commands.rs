//! The five subcommands. Each resolves and validates its settings first,
//! then runs its stage and writes artifacts under the workspace.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};

use sast_triage::embed::{
    embed_average, embed_samples, load_model, save_model, train_embeddings, EmbeddingModel,
};
use sast_triage::evaluate::{evaluate_protocol, filter_report, ComparisonTable, Protocol};
use sast_triage::ingest::{
    fill_snippets, join_labels, parse_ground_truth, parse_report, read_dataset, write_dataset,
    TypeMap,
};
use sast_triage::learn::{
    load_classifier_as, save_classifier, train_classifier, Classifier, EnsembleModel, ModelKind,
};
use sast_triage::{LabeledSample, Scalar};

use crate::config::FileConfig;
use crate::settings::{self as s, usage};
use crate::{
    Cli, Command, EvaluateArgs, FilterArgs, IngestArgs, InspectArgs, Precision, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) if !path.is_file() => {
            return usage(format!("config file {} does not exist", path.display()))
        }
        Some(path) => FileConfig::load(path).map_err(|e| s::UsageError(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return usage("--threads must be positive");
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let ws = s::workspace(cli.workspace, &cfg)?;
    let precision = s::precision(cli.precision, &cfg)?;
    match cli.command {
        Command::Ingest(args) => ingest(args, &ws, &cfg),
        Command::Train(args) => {
            let seed = s::require_seed(cli.seed, &cfg)?;
            match precision {
                Precision::F64 => train::<f64>(args, &ws, seed, &cfg),
                Precision::F32 => train::<f32>(args, &ws, seed, &cfg),
            }
        }
        Command::Evaluate(args) => {
            let seed = s::require_seed(cli.seed, &cfg)?;
            match precision {
                Precision::F64 => evaluate::<f64>(args, &ws, seed, &cfg),
                Precision::F32 => evaluate::<f32>(args, &ws, seed, &cfg),
            }
        }
        Command::Filter(args) => match precision {
            Precision::F64 => filter::<f64>(args, &ws, &cfg),
            Precision::F32 => filter::<f32>(args, &ws, &cfg),
        },
        Command::Inspect(args) => match precision {
            Precision::F64 => inspect::<f64>(args, &ws),
            Precision::F32 => inspect::<f32>(args, &ws),
        },
    }
}

fn type_map(path: Option<PathBuf>, cfg: &FileConfig) -> Result<TypeMap> {
    match path.or_else(|| cfg.paths.type_map.clone()) {
        None => Ok(TypeMap::bundled()),
        Some(p) => {
            let text = fs::read_to_string(&p)
                .map_err(|e| s::UsageError(format!("cannot read type map {}: {e}", p.display())))?;
            TypeMap::parse(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn create_workspace(ws: &Path) -> Result<()> {
    fs::create_dir_all(ws).with_context(|| format!("cannot create workspace {}", ws.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn load_samples(ws: &Path) -> Result<Vec<LabeledSample>> {
    let path = s::dataset_path(ws);
    s::existing_artifact(&path, "run `ingest` first")?;
    let text =
        fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    read_dataset(&text).with_context(|| format!("in {}", path.display()))
}

fn load_embedding<T: Scalar>(ws: &Path, dim: usize) -> Result<EmbeddingModel<T>> {
    let path = s::embedding_path(ws, dim);
    s::existing_artifact(&path, "run `train` for this dimension first")?;
    let bytes = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
    load_model(&bytes).with_context(|| format!("in {}", path.display()))
}

fn ingest(args: IngestArgs, ws: &Path, cfg: &FileConfig) -> Result<()> {
    let report_path = s::input_path(args.report, cfg.paths.report.as_ref(), "report", "report")?;
    let truth_path = s::input_path(
        args.truth,
        cfg.paths.truth.as_ref(),
        "ground truth",
        "truth",
    )?;
    let root = s::input_path(
        args.source_root,
        cfg.paths.source_root.as_ref(),
        "source root",
        "source-root",
    )?;
    let map = type_map(args.type_map, cfg)?;
    create_workspace(ws)?;

    let report =
        fs::read(&report_path).with_context(|| format!("cannot read {}", report_path.display()))?;
    let mut parsed =
        parse_report(&report, &map).with_context(|| format!("in {}", report_path.display()))?;
    let truth_text = fs::read_to_string(&truth_path)
        .with_context(|| format!("cannot read {}", truth_path.display()))?;
    let truth =
        parse_ground_truth(&truth_text).with_context(|| format!("in {}", truth_path.display()))?;

    let failures = fill_snippets(&root, &mut parsed.warnings);
    for (i, e) in &failures {
        eprintln!(
            "warning: instance {} skipped: {e}",
            parsed.warnings[*i].ordinal
        );
    }
    let failed: Vec<usize> = failures.iter().map(|(i, _)| *i).collect();
    let extracted: Vec<_> = parsed
        .warnings
        .iter()
        .enumerate()
        .filter(|(i, _)| !failed.contains(i))
        .map(|(_, w)| w.clone())
        .collect();
    let (samples, join) = join_labels(&extracted, &truth);
    write(&s::dataset_path(ws), write_dataset(&samples))?;

    let real = samples.iter().filter(|x| x.label.is_real()).count();
    println!("bug instances       {}", parsed.instance_count());
    println!("unmapped/no lines   {}", parsed.skipped.len());
    println!("extraction failures {}", failures.len());
    println!("unmatched warnings  {}", join.unmatched_warnings.len());
    println!("unused truth rows   {}", join.unmatched_truth.len());
    println!(
        "samples             {} ({} REAL, {} SPURIOUS)",
        samples.len(),
        real,
        samples.len() - real
    );
    println!("wrote {}", s::dataset_path(ws).display());
    Ok(())
}

fn train<T: Scalar>(args: TrainArgs, ws: &Path, seed: u64, cfg: &FileConfig) -> Result<()> {
    let dims = s::dims(args.dims, cfg)?;
    let kinds = s::models(args.models, cfg)?;
    if kinds.contains(&ModelKind::Ensemble) {
        let members = [
            ModelKind::RandomForest,
            ModelKind::LinearSvm,
            ModelKind::Gbt,
        ];
        if let Some(m) = members.iter().find(|m| !kinds.contains(m)) {
            return usage(format!(
                "the ensemble needs its three members; add `{}` to the requested models",
                m.tag()
            ));
        }
    }
    let hps = dims
        .iter()
        .map(|&d| s::hyperparams(d, seed, &args.embedding, cfg))
        .collect::<Result<Vec<_>>>()?;
    let params = s::classifier_params(seed, &args.model, cfg);
    let samples = load_samples(ws)?;
    if samples.is_empty() {
        anyhow::bail!("the dataset is empty; nothing to train on");
    }
    let corpus: Vec<_> = samples.iter().map(LabeledSample::tokens).collect();

    for hp in hps {
        let dim = hp.dim;
        let started = Instant::now();
        let embedding: EmbeddingModel<T> = train_embeddings(&corpus, &hp)?;
        write(&s::embedding_path(ws, dim), save_model(&embedding))?;
        eprintln!(
            "dim {dim}: embedding over {} tokens in {:.1?}",
            embedding.vocab.len(),
            started.elapsed()
        );
        println!("embedding dim {dim}: vocabulary {}", embedding.vocab.len());

        let data = embed_samples(&embedding, &samples)?;
        let mut trained: Vec<(ModelKind, Classifier<T>)> = Vec::new();
        for &kind in &kinds {
            let started = Instant::now();
            let model = if kind == ModelKind::Ensemble {
                let member = |k| {
                    trained
                        .iter()
                        .find(|(tk, _)| *tk == k)
                        .map(|(_, m)| m.clone())
                };
                match (
                    member(ModelKind::RandomForest),
                    member(ModelKind::LinearSvm),
                    member(ModelKind::Gbt),
                ) {
                    (
                        Some(Classifier::RandomForest(f)),
                        Some(Classifier::LinearSvm(v)),
                        Some(Classifier::Gbt(g)),
                    ) => Classifier::Ensemble(EnsembleModel::new(f, v, g)?),
                    // members requested after the ensemble are trained on the spot
                    _ => train_classifier(kind, &data, &params)?,
                }
            } else {
                train_classifier(kind, &data, &params)?
            };
            let correct = data
                .rows()
                .zip(&data.labels)
                .filter(|(x, l)| model.predict(x).map(|p| p.label == **l).unwrap_or(false))
                .count();
            write(&s::model_path(ws, kind, dim), save_classifier(&model))?;
            eprintln!(
                "dim {dim}: {} trained in {:.1?}",
                kind.display_name(),
                started.elapsed()
            );
            println!(
                "{:<16} dim {dim}: training accuracy {:.4}",
                kind.display_name(),
                correct as f64 / data.len() as f64
            );
            trained.push((kind, model));
        }
    }
    Ok(())
}

fn protocol_label(p: Protocol) -> String {
    match p {
        Protocol::CrossValidation { folds } => format!("stratified {folds}-fold cross-validation"),
        Protocol::Holdout { test_fraction } => {
            format!("stratified holdout, test fraction {test_fraction}")
        }
    }
}

fn evaluate<T: Scalar>(args: EvaluateArgs, ws: &Path, seed: u64, cfg: &FileConfig) -> Result<()> {
    let dims = s::dims(args.dims, cfg)?;
    let mut kinds = s::models(args.models, cfg)?;
    if (args.baseline || cfg.pipeline.baseline == Some(true))
        && !kinds.contains(&ModelKind::Majority)
    {
        kinds.push(ModelKind::Majority);
    }
    let protocol = s::protocol(args.protocol, args.folds, args.test_fraction, cfg)?;
    let params = s::classifier_params(seed, &args.model, cfg);
    let samples = load_samples(ws)?;
    for &d in &dims {
        s::existing_artifact(
            &s::embedding_path(ws, d),
            "run `train` for this dimension first",
        )?;
    }
    let reports_dir = ws.join("reports");
    create_workspace(&reports_dir)?;

    let mut table = ComparisonTable::default();
    for &dim in &dims {
        let embedding: EmbeddingModel<T> = load_embedding(ws, dim)?;
        let data = embed_samples(&embedding, &samples)?;
        for &kind in &kinds {
            let started = Instant::now();
            let report = evaluate_protocol(&data, kind, &params, protocol, seed)
                .with_context(|| format!("evaluating {} at dim {dim}", kind.display_name()))?;
            eprintln!(
                "dim {dim}: {} evaluated in {:.1?}",
                kind.display_name(),
                started.elapsed()
            );
            let stem = reports_dir.join(format!("{}-d{dim}", kind.tag()));
            let mut text = String::new();
            let _ = writeln!(text, "model: {}", kind.display_name());
            let _ = writeln!(text, "dim: {dim}");
            let _ = writeln!(text, "protocol: {}", protocol_label(protocol));
            let _ = writeln!(text, "seed: {seed}\n");
            text.push_str(&report.to_table());
            write(&stem.with_extension("txt"), text)?;
            write(&stem.with_extension("kv"), report.to_key_values())?;
            table.insert(kind, dim, report.accuracy);
        }
    }
    let mut text = format!(
        "Accuracy (%) by embedding dimension; {}, seed {seed}\n\n",
        protocol_label(protocol)
    );
    text.push_str(&table.to_text());
    write(&reports_dir.join("comparison.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn filter<T: Scalar>(args: FilterArgs, ws: &Path, cfg: &FileConfig) -> Result<()> {
    let report_path = s::input_path(args.report, cfg.paths.report.as_ref(), "report", "report")?;
    let root = s::input_path(
        args.source_root,
        cfg.paths.source_root.as_ref(),
        "source root",
        "source-root",
    )?;
    let map = type_map(args.type_map, cfg)?;
    let kind = match args.model {
        Some(m) => m.parse::<ModelKind>().map_err(s::UsageError)?,
        None => match cfg.pipeline.models.as_deref() {
            Some([only]) => only.parse::<ModelKind>().map_err(s::UsageError)?,
            _ => ModelKind::Ensemble,
        },
    };
    let dim = match args.dim.or_else(|| {
        cfg.pipeline
            .dims
            .as_deref()
            .and_then(|d| d.first().copied())
    }) {
        Some(d) => d,
        None => return usage("pass --dim to choose the embedding dimension"),
    };
    let threshold = s::threshold(args.threshold, cfg)?;
    let model_path = s::model_path(ws, kind, dim);
    s::existing_artifact(
        &model_path,
        "run `train` with this model and dimension first",
    )?;
    let embedding: EmbeddingModel<T> = load_embedding(ws, dim)?;
    let bytes =
        fs::read(&model_path).with_context(|| format!("cannot read {}", model_path.display()))?;
    let classifier: Classifier<T> =
        load_classifier_as(&bytes, kind).with_context(|| format!("in {}", model_path.display()))?;

    let report =
        fs::read(&report_path).with_context(|| format!("cannot read {}", report_path.display()))?;
    let (filtered, summary) =
        filter_report(&report, &root, &map, &embedding, &classifier, threshold)
            .with_context(|| format!("filtering {}", report_path.display()))?;
    let stem = ws.join(format!("filtered-{}-d{dim}", kind.tag()));
    write(&stem.with_extension("xml"), filtered)?;
    write(&stem.with_extension("txt"), summary.to_text())?;
    print!("{}", summary.to_text());
    println!("wrote {}", stem.with_extension("xml").display());
    Ok(())
}

fn inspect<T: Scalar>(args: InspectArgs, ws: &Path) -> Result<()> {
    let samples = load_samples(ws)?;
    let Some(sample) = samples.get(args.sample) else {
        return usage(format!(
            "sample {} out of range; the dataset has {} rows",
            args.sample,
            samples.len()
        ));
    };
    let mut out = String::new();
    let w = &sample.warning;
    let _ = writeln!(out, "source: {}", w.source_file);
    let _ = writeln!(out, "category: {}", w.category);
    let _ = writeln!(out, "type: {}", w.vuln_type);
    let _ = writeln!(out, "label: {}", sample.label);
    let _ = writeln!(out, "code:");
    for line in w.code_block.lines() {
        let _ = writeln!(out, "  {line}");
    }
    let tokens = sample.tokens();
    let _ = writeln!(out, "tokens ({}):", tokens.len());
    for t in tokens.iter() {
        let _ = writeln!(out, "  {t}");
    }
    if let Some(dim) = args.dim {
        let embedding: EmbeddingModel<T> = load_embedding(ws, dim)?;
        let features = embed_average(&embedding, &tokens);
        let _ = writeln!(out, "known tokens: {}", features.n_known_tokens);
        let values: Vec<String> = features.values.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(out, "vector: [{}]", values.join(", "));
    }
    // a closed pipe (e.g. `| head`) is not an error for a dump command
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(out.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("cannot write to stdout"),
    }
}
