mod config;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crisis_core::corpus::{load_corpus, save_corpus, validate_corpus, Corpus, CorpusFormat, LabelClass, Message};
use crisis_core::embed::{build_representation, RepresentationId, Resources};
use crisis_core::evalx::{
    aggregate_matrix, confusion_counts, emit_report, test_hash, EvalReport, ExperimentOptions, F1Mode, Metrics,
    ReportFormat, ReportOptions, RunMatrix, RunResult,
};
use crisis_core::forest::{fit_forest, load_model, save_model, ForestParams};
use crisis_core::matrix::FeatureMatrix;
use crisis_core::pipeline::{load_resources, run_grid};
use crisis_core::scenario::{
    build_from_holdout, export_manifest, import_manifest, BuildOptions, Holdout, ScenarioDataset, ScenarioKind,
    ScenarioSpec,
};
use crisis_core::seed::{derive_named, derive_seed};
use crisis_core::synthetic::{write_fixture, SyntheticConfig};
use crisis_core::unify::{
    annotate_events, apply_label_mapping, fill_missing_languages, load_raw_rows, load_taxonomy, merge_corpora,
    LabelMapping, ProfileDetector,
};

use config::{Overrides, RunConfig, Settings};

/// Environment variable naming a live translation endpoint.
const TRANSLATE_ENDPOINT_VAR: &str = "CRISIS_TRANSLATE_ENDPOINT";

#[derive(Parser, Debug)]
#[command(name = "crisis", version, about = "Cross-lingual and cross-domain crisis message classification")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Unified corpus file (repeatable; corpora are merged).
    #[arg(long, global = true)]
    corpus: Vec<PathBuf>,
    /// Label mapping table.
    #[arg(long, global = true)]
    mapping: Option<PathBuf>,
    /// Event taxonomy table.
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
    /// Scenario kind (repeatable).
    #[arg(long, global = true)]
    kind: Vec<ScenarioKind>,
    #[arg(long, global = true)]
    target_lang: Option<String>,
    #[arg(long, global = true)]
    target_domain: Option<String>,
    /// Representation (repeatable).
    #[arg(long, global = true)]
    rep: Vec<RepresentationId>,
    #[arg(long, global = true)]
    repeats: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge source tables into one unified corpus.
    Unify {
        /// Source table, as `PATH` or `DATASET=PATH` (repeatable).
        #[arg(long, required = true)]
        source: Vec<String>,
        /// Per-message label overrides.
        #[arg(long)]
        overrides: Option<PathBuf>,
    },
    /// Fill in missing message languages.
    DetectLang,
    /// Build scenario manifests for the configured grid.
    Scenario,
    /// Compute a representation for every message of a manifest.
    Features {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Train a forest on one balanced run of a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Score a model on a manifest's test set.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Run the whole grid and write every report.
    RunMatrix,
    /// Turn evaluation reports or matrices into tables and plot data.
    Report {
        /// `matrix.json` or `eval.json` files (repeatable).
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long, value_parser = ["all", "delimited", "structured", "plot"], default_value = "all")]
        format: String,
        #[arg(long, default_value = "f1_positive")]
        headline: F1Mode,
        /// Accept a grid with missing cells.
        #[arg(long)]
        allow_gaps: bool,
    },
    /// Check a corpus, a manifest and the configuration.
    Validate {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Write the synthetic fixture and a config that runs it.
    Synth,
}

fn settings(common: &Common) -> Result<Settings> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Settings::resolve(
        cfg,
        Overrides {
            corpus: common.corpus.clone(),
            mapping: common.mapping.clone(),
            taxonomy: common.taxonomy.clone(),
            kinds: common.kind.clone(),
            target_lang: common.target_lang.clone(),
            target_domain: common.target_domain.clone(),
            reps: common.rep.clone(),
            repeats: common.repeats,
            seed: common.seed,
            out: common.out.clone(),
            workers: common.workers,
        },
    )
}

fn ensure_valid(s: &Settings, need_grid: bool) -> Result<()> {
    let problems = s.problems(need_grid);
    if problems.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = problems.iter().map(|p| format!("  - {p}")).collect();
    bail!("invalid configuration:\n{}", list.join("\n"))
}

fn load_corpora(paths: &[PathBuf]) -> Result<Corpus> {
    let corpora = paths
        .iter()
        .map(|p| load_corpus(p, CorpusFormat::from_path(p)).with_context(|| format!("loading corpus {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok(match corpora.len() {
        1 => corpora.into_iter().next().expect("one corpus"),
        _ => merge_corpora(&corpora)?,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn stage(spec: &ScenarioSpec, rep: Option<RepresentationId>, what: &str) -> String {
    let rep = rep.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
    format!("[{} | {rep} | {what}]", spec.label())
}

fn warn_live_endpoint() {
    if let Ok(url) = std::env::var(TRANSLATE_ENDPOINT_VAR) {
        log::warn!("{TRANSLATE_ENDPOINT_VAR}={url} is set, but only cached and dictionary translation are available");
    }
}

fn manifest_name(spec: &ScenarioSpec) -> String {
    format!("{}_{}_{}.manifest.json", spec.kind, spec.target_language, spec.target_domain)
}

fn cmd_unify(s: &Settings, sources: &[String], overrides: Option<&Path>) -> Result<()> {
    let mapping = match &s.mapping {
        Some(p) => LabelMapping::load(p, overrides)?,
        None => match overrides {
            Some(o) => LabelMapping::load_overrides(o).and_then(|ov| LabelMapping::shipped().with_overrides(ov))?,
            None => LabelMapping::shipped(),
        },
    };
    let taxonomy = s.taxonomy.as_ref().context("unify needs --taxonomy")?;
    let taxonomy = load_taxonomy(taxonomy)?;
    let mut rows = Vec::new();
    for src in sources {
        let (dataset, path) = match src.split_once('=') {
            Some((d, p)) => (Some(d), PathBuf::from(p)),
            None => (None, PathBuf::from(src)),
        };
        rows.extend(load_raw_rows(&path, dataset).with_context(|| format!("reading source {}", path.display()))?);
    }
    let outcome = apply_label_mapping(&rows, &mapping);
    if !outcome.unmapped.is_empty() {
        let list: Vec<String> = outcome.unmapped.iter().map(|(d, l)| format!("  - {d}: {l:?}")).collect();
        bail!("labels without a mapping entry:\n{}", list.join("\n"));
    }
    let mut corpus = Corpus::new(outcome.messages, vec![], sources.to_vec());
    let (filled, failed) = fill_missing_languages(&mut corpus, &ProfileDetector::bundled());
    if !failed.is_empty() {
        log::warn!("language detection failed for {} messages", failed.len());
    }
    let corpus = annotate_events(&corpus, &taxonomy)?;
    create_dir(&s.out)?;
    let path = s.out.join("corpus.jsonl");
    save_corpus(&corpus, &path, CorpusFormat::UnifiedJsonLines)?;
    println!(
        "{} messages, {} events, {} discarded, {filled} languages detected -> {}",
        corpus.len(),
        corpus.events.len(),
        outcome.discarded,
        path.display()
    );
    Ok(())
}

fn cmd_detect_lang(s: &Settings) -> Result<()> {
    let mut corpus = load_corpora(&s.corpus)?;
    let (filled, failed) = fill_missing_languages(&mut corpus, &ProfileDetector::bundled());
    create_dir(&s.out)?;
    let path = s.out.join("corpus.jsonl");
    save_corpus(&corpus, &path, CorpusFormat::UnifiedJsonLines)?;
    println!("{filled} languages filled, {} undetectable -> {}", failed.len(), path.display());
    for id in failed {
        println!("  undetectable: {id}");
    }
    Ok(())
}

fn cmd_scenario(s: &Settings) -> Result<()> {
    warn_live_endpoint();
    let corpus = load_corpora(&s.corpus)?;
    let resources = load_resources(&s.resources, &[])?;
    let holdout = Holdout::compute(&corpus);
    create_dir(&s.out)?;
    let options = BuildOptions {
        target_ratio: s.target_ratio,
        translator: resources.translator.as_deref(),
    };
    for kind in &s.grid.kinds {
        for (lang, domain) in &s.grid.targets {
            let spec = ScenarioSpec::new(*kind, lang, domain, s.seed);
            let ds = spec
                .check()
                .and_then(|_| build_from_holdout(&corpus, &spec, &holdout, options))
                .with_context(|| stage(&spec, None, "scenario"))?;
            let path = s.out.join(manifest_name(&spec));
            export_manifest(&ds, &corpus, &path)?;
            println!(
                "{}: {} train pool, {} test ({} added negatives, shortfall {}) -> {}",
                spec.label(),
                ds.train_pool.len(),
                ds.test.len(),
                ds.augmentation_log.len(),
                ds.shortfall,
                path.display()
            );
        }
    }
    Ok(())
}

fn load_dataset(s: &Settings, manifest: &Path) -> Result<(Corpus, ScenarioDataset)> {
    anyhow::ensure!(!s.corpus.is_empty(), "a manifest needs its corpus (--corpus or --config)");
    let corpus = load_corpora(&s.corpus)?;
    let ds = import_manifest(manifest, &corpus).with_context(|| format!("loading manifest {}", manifest.display()))?;
    Ok((corpus, ds))
}

/// Every message a dataset touches: the full training pool and the test set.
fn dataset_messages(corpus: &Corpus, ds: &ScenarioDataset) -> Result<Vec<Message>> {
    let pool = ScenarioDataset {
        train: ds.train_pool.clone(),
        ..ds.clone()
    };
    let (train, test) = pool.materialize(corpus)?;
    let mut seen = HashSet::new();
    Ok(train.into_iter().chain(test).filter(|m| seen.insert(m.id.clone())).collect())
}

fn single_rep(s: &Settings) -> Result<RepresentationId> {
    match s.grid.representations.as_slice() {
        [rep] => Ok(*rep),
        _ => bail!("pass exactly one --rep"),
    }
}

fn cmd_features(s: &Settings, manifest: &Path) -> Result<()> {
    warn_live_endpoint();
    let rep = single_rep(s)?;
    let (corpus, ds) = load_dataset(s, manifest)?;
    let resources = load_resources(&s.resources, &[rep]).with_context(|| stage(&ds.spec, Some(rep), "resources"))?;
    let messages = dataset_messages(&corpus, &ds).with_context(|| stage(&ds.spec, Some(rep), "materialize"))?;
    let matrix =
        build_representation(&messages, rep, &resources).with_context(|| stage(&ds.spec, Some(rep), "features"))?;
    create_dir(&s.out)?;
    let path = s.out.join(format!("features_{}.csv", rep.key()));
    matrix.write_csv(&path)?;
    println!("{} rows x {} columns -> {}", matrix.len(), matrix.width(), path.display());
    Ok(())
}

fn rows_for(matrix: &FeatureMatrix, ids: &[crisis_core::scenario::LabeledId]) -> Result<(Vec<Vec<f64>>, Vec<LabelClass>)> {
    let index: std::collections::HashMap<&str, usize> =
        matrix.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut x = Vec::with_capacity(ids.len());
    for l in ids {
        let i = index
            .get(l.id.as_str())
            .with_context(|| format!("feature file has no row for message {}", l.id))?;
        x.push(matrix.rows[*i].clone());
    }
    Ok((x, ids.iter().map(|l| l.label).collect()))
}

fn forest_for_run(s: &Settings, run: usize) -> (u64, ForestParams) {
    let seed = derive_seed(s.seed, run as u64);
    let params = ForestParams {
        seed: derive_named(seed, "forest"),
        ..s.forest.clone()
    };
    (seed, params)
}

fn cmd_train(s: &Settings, manifest: &Path, features: &Path, run: usize) -> Result<()> {
    let (_, ds) = load_dataset(s, manifest)?;
    let matrix = FeatureMatrix::read_csv(features)?;
    let rep = s.grid.representations.first().copied().filter(|_| s.grid.representations.len() == 1);
    let train = ds.balanced_run(run as u64).with_context(|| stage(&ds.spec, rep, "balance"))?;
    let (x, y) = rows_for(&matrix, &train).with_context(|| stage(&ds.spec, rep, "train"))?;
    let (_, params) = forest_for_run(s, run);
    let mut model = fit_forest(&x, &y, &params).with_context(|| stage(&ds.spec, rep, "train"))?;
    model.representation = rep;
    create_dir(&s.out)?;
    let path = s.out.join(format!("model_run{run}.json"));
    save_model(&model, &path)?;
    println!("{} trees on {} messages -> {}", model.trees.len(), x.len(), path.display());
    Ok(())
}

fn cmd_eval(s: &Settings, model: &Path, manifest: &Path, features: &Path) -> Result<()> {
    let (_, ds) = load_dataset(s, manifest)?;
    let model = load_model(model)?;
    let rep = model
        .representation
        .or_else(|| s.grid.representations.first().copied())
        .context("model has no representation; pass --rep")?;
    let matrix = FeatureMatrix::read_csv(features)?;
    let (x, y) = rows_for(&matrix, &ds.test).with_context(|| stage(&ds.spec, Some(rep), "eval"))?;
    let predicted = model.predict(&x).with_context(|| stage(&ds.spec, Some(rep), "predict"))?;
    let confusion = confusion_counts(&predicted, &y)?;
    let metrics = Metrics::of(&confusion);
    let run = RunResult {
        run: 0,
        seed: model.params.seed,
        train_size: 0,
        confusion,
        metrics,
    };
    let report = EvalReport {
        spec: ds.spec.clone(),
        representation: rep,
        test_hash: test_hash(&ds.test),
        test_size: ds.test.len(),
        runs: vec![run],
        averaged: metrics,
    };
    create_dir(&s.out)?;
    let path = s.out.join("eval.json");
    write_json(&path, &report)?;
    println!(
        "f1_positive {:.6}  f1_macro {:.6}  f1_weighted {:.6} -> {}",
        metrics.f1_positive,
        metrics.f1_macro,
        metrics.f1_weighted,
        path.display()
    );
    Ok(())
}

fn emit_all(matrix: &RunMatrix, formats: &[ReportFormat], dir: &Path, headline: F1Mode) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for f in formats {
        written.extend(emit_report(matrix, *f, dir, ReportOptions { headline })?);
    }
    Ok(written)
}

fn cmd_run_matrix(s: &Settings) -> Result<()> {
    ensure_valid(s, true)?;
    warn_live_endpoint();
    let corpus = load_corpora(&s.corpus)?;
    let resources: Resources = load_resources(&s.resources, &s.grid.representations)?;
    let options = ExperimentOptions {
        repeats: s.repeats,
        master_seed: s.seed,
        forest: &s.forest,
        build: BuildOptions {
            target_ratio: s.target_ratio,
            translator: resources.translator.as_deref(),
        },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = s.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let matrix = pool.install(|| run_grid(&corpus, &s.grid, &resources, &options))?;
    create_dir(&s.out)?;
    write_json(&s.out.join("matrix.json"), &matrix)?;
    let written = emit_all(&matrix, &ReportFormat::ALL, &s.out, F1Mode::Positive)?;
    println!(
        "{} cells evaluated, {} skipped, {} report files in {}",
        matrix.cells.len(),
        matrix.skipped.len(),
        written.len() + 1,
        s.out.display()
    );
    for sk in &matrix.skipped {
        println!("  skipped {}: {}", sk.key, sk.reason);
    }
    Ok(())
}

fn cmd_report(s: &Settings, inputs: &[PathBuf], format: &str, headline: F1Mode, allow_gaps: bool) -> Result<()> {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for p in inputs {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        if let Ok(m) = serde_json::from_str::<RunMatrix>(&text) {
            reports.extend(m.cells.into_values());
            skipped.extend(m.skipped);
        } else {
            let r: EvalReport =
                serde_json::from_str(&text).with_context(|| format!("{} is neither a matrix nor a report", p.display()))?;
            reports.push(r);
        }
    }
    let mut matrix = aggregate_matrix(reports, allow_gaps || !skipped.is_empty())?;
    matrix.skipped = skipped;
    let formats: Vec<ReportFormat> = match format {
        "delimited" => vec![ReportFormat::Delimited],
        "structured" => vec![ReportFormat::Structured],
        "plot" => vec![ReportFormat::PlotData],
        _ => ReportFormat::ALL.to_vec(),
    };
    for p in emit_all(&matrix, &formats, &s.out, headline)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_validate(s: &Settings, manifest: Option<&Path>) -> Result<()> {
    let mut problems = s.problems(false);
    if problems.is_empty() {
        let corpus = load_corpora(&s.corpus)?;
        problems.extend(validate_corpus(&corpus).iter().map(|v| v.to_string()));
        if let Some(m) = manifest {
            if let Err(e) = import_manifest(m, &corpus) {
                problems.push(format!("manifest {}: {e}", m.display()));
            }
        }
        println!("{} messages, {} events checked", corpus.len(), corpus.events.len());
    }
    if problems.is_empty() {
        println!("ok");
        return Ok(());
    }
    for p in &problems {
        println!("  - {p}");
    }
    bail!("{} problems found", problems.len())
}

const SYNTH_CONFIG: &str = r#"corpus = ["corpus.jsonl"]
seed = 42
repeats = 2
out = "report"

[resources]
glove = "glove.txt"
translation_cache = "translations.jsonl"

[resources.muse]
en = "muse_en.txt"
es = "muse_es.txt"
it = "muse_it.txt"

[resources.caches]
mbert = "cache_mbert.jsonl"
mt_bert = "cache_mt_bert.jsonl"
xlm_r = "cache_xlm_r.jsonl"

[grid]
targets = [
    { language = "es", domain = "flood" },
    { language = "it", domain = "earthquake" },
]

[forest]
n_trees = 25
"#;

fn cmd_synth(common: &Common) -> Result<()> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("fixture"));
    let cfg = SyntheticConfig {
        seed: common.seed.unwrap_or(SyntheticConfig::default().seed),
        ..SyntheticConfig::default()
    };
    write_fixture(&dir, &cfg)?;
    let path = dir.join("config.toml");
    std::fs::write(&path, SYNTH_CONFIG).with_context(|| format!("writing {}", path.display()))?;
    println!("fixture written; run `crisis run-matrix --config {}`", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Command::Synth = cli.command {
        return cmd_synth(&cli.common);
    }
    let s = settings(&cli.common)?;
    match &cli.command {
        Command::Unify { source, overrides } => cmd_unify(&s, source, overrides.as_deref()),
        Command::DetectLang => cmd_detect_lang(&s),
        Command::Scenario => {
            ensure_valid(&s, true)?;
            cmd_scenario(&s)
        }
        Command::Features { manifest } => cmd_features(&s, manifest),
        Command::Train { manifest, features, run } => cmd_train(&s, manifest, features, *run),
        Command::Eval {
            model,
            manifest,
            features,
        } => cmd_eval(&s, model, manifest, features),
        Command::RunMatrix => cmd_run_matrix(&s),
        Command::Report {
            input,
            format,
            headline,
            allow_gaps,
        } => cmd_report(&s, input, format, *headline, *allow_gaps),
        Command::Validate { manifest } => cmd_validate(&s, manifest.as_deref()),
        Command::Synth => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // core errors already embed their sources in their message
            let mut last = String::new();
            let mut lines = Vec::new();
            for cause in e.chain() {
                let msg = cause.to_string();
                if !last.ends_with(&msg) {
                    lines.push(msg.clone());
                }
                last = msg;
            }
            eprintln!("error: {}", lines.join("\n  caused by: "));
            ExitCode::FAILURE
        }
    }
}
