//! The `usertype` command line: one subcommand per pipeline stage.
//!
//! Every subcommand accepts `--config <run.json>`; explicit flags override
//! the values in the file. Each run writes a manifest (resolved config,
//! arguments, version and seed) next to its outputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use usertype::config::{default_config, RunConfig};
use usertype::corpus::{generate_synthetic, load_corpus, synthetic_word_vectors, Corpus};
use usertype::em::{run_em, EmRunReport};
use usertype::encoder::{load_word_vectors, EncoderVariant, VocabEmbeddings};
use usertype::eval::{
    evaluate, export_embeddings, run_ablation, write_ablation_csv, EvalOptions, EvalReport, UserClassifier,
};
use usertype::graph::{build_graph, InfoGraph, View};
use usertype::trainer::{
    train_embeddings, train_supervised_baseline, write_loss_csv, EmbeddingSpace, SupervisedClassifier, TrainConfig,
};
use usertype::weak_labeler::{assess_quality, label_corpus, load_rules, WeakLabeling};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "usertype", version, about = "Weakly supervised user type classification")]
struct Cli {
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus and matching word vectors.
    Synth(SynthArgs),
    /// Apply keyword rules to profile descriptions.
    Weaklabel(WeaklabelArgs),
    /// Build the information graph and write it as JSON.
    BuildGraph(BuildGraphArgs),
    /// Train one embedding space on the observed graph.
    Train(TrainArgs),
    /// Run the iterative self-labeling loop.
    Em(EmArgs),
    /// Train the supervised sequence classifier on the weak labels.
    Baseline(BaselineArgs),
    /// Score an EM report or a baseline classifier against gold labels.
    Eval(EvalArgs),
    /// Label propagation and EM over the des, net and des+net views.
    Ablation(AblationArgs),
    /// Write node vectors to CSV.
    Export(ExportArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct ConfigArg {
    /// Run configuration (JSON). Relative paths inside it are resolved
    /// against its directory.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Top-level seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Clone, Default)]
struct InputArgs {
    /// Corpus JSONL.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Weak labels JSONL; computed from the rules when absent.
    #[arg(long)]
    weak: Option<PathBuf>,
    /// Rule file, or `builtin:yoga`, `builtin:keto`, `builtin:synthetic`.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Word vectors (`token v1 .. vd` per line).
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Dimension of the word vectors.
    #[arg(long)]
    vector_dim: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
struct ModelArgs {
    /// Graph view: des, net or des+net.
    #[arg(long)]
    view: Option<View>,
    /// User encoder: mean-pool, lstm or bi-lstm.
    #[arg(long, value_parser = parse_variant)]
    encoder: Option<EncoderVariant>,
    /// Node vector dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// LSTM hidden size.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    /// Corpus output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Word vector output path.
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    vector_dim: Option<usize>,
    /// Number of users.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    coverage: Option<f64>,
    #[arg(long)]
    homophily: Option<f64>,
    /// Share of keyword users given the wrong type's keyword.
    #[arg(long)]
    keyword_noise: Option<f64>,
}

#[derive(Debug, Args)]
struct WeaklabelArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Weak labels output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildGraphArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    view: Option<View>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Promotions per iteration.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    churn_threshold: Option<f64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Re-initialize every ensemble member each iteration.
    #[arg(long)]
    cold_restart: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    /// LSTM hidden size (default 150).
    #[arg(long)]
    hidden: Option<usize>,
    /// Epochs (default 20).
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate (default 0.01).
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    /// EM report JSON; defaults to `<output_dir>/em_report.json`.
    #[arg(long, conflicts_with = "classifier")]
    report: Option<PathBuf>,
    /// Baseline classifier JSON.
    #[arg(long)]
    classifier: Option<PathBuf>,
    /// Leave weakly labeled users out of the evaluation.
    #[arg(long)]
    exclude_weak: bool,
    /// Metrics output; defaults to `<output_dir>/metrics.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AblationArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    input: InputArgs,
    /// Embedding space JSON; defaults to `<output_dir>/space.json`.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Graph JSON; defaults to `<output_dir>/graph.json`.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_variant(s: &str) -> std::result::Result<EncoderVariant, String> {
    match s {
        "mean-pool" | "mean_pool" => Ok(EncoderVariant::MeanPool),
        "lstm" => Ok(EncoderVariant::Lstm),
        "bi-lstm" | "bi_lstm" | "bilstm" => Ok(EncoderVariant::BiLstm),
        _ => Err(format!("unknown encoder `{s}` (mean-pool, lstm, bi-lstm)")),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code: 0 on success, 2 on usage errors and 1 on
/// runtime failures.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli.command, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn run(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a, argv),
        Command::Weaklabel(a) => weaklabel(a, argv),
        Command::BuildGraph(a) => build_graph_cmd(a, argv),
        Command::Train(a) => train(a, argv),
        Command::Em(a) => em(a, argv),
        Command::Baseline(a) => baseline(a, argv),
        Command::Eval(a) => eval(a, argv),
        Command::Ablation(a) => ablation(a, argv),
        Command::Export(a) => export(a, argv),
    }
}

fn load_config(arg: &ConfigArg) -> Result<RunConfig> {
    let mut config = match &arg.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => default_config(),
    };
    if let Some(seed) = arg.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn apply_inputs(config: &mut RunConfig, input: &InputArgs) {
    if let Some(p) = &input.corpus {
        config.paths.corpus = p.clone();
    }
    if let Some(p) = &input.weak {
        config.weak_labels = Some(p.clone());
    }
    if let Some(p) = &input.rules {
        config.paths.rules = p.clone();
    }
    if let Some(p) = &input.vectors {
        config.paths.word_vectors = p.clone();
    }
    if let Some(d) = input.vector_dim {
        config.word_vector_dim = d;
    }
}

fn apply_model(config: &mut RunConfig, model: &ModelArgs) {
    let t = &mut config.em.train;
    if let Some(v) = model.view {
        config.view = v;
    }
    if let Some(v) = model.encoder {
        t.encoder.variant = v;
    }
    if let Some(h) = model.hidden {
        t.encoder.hidden = h;
    }
    match (model.dim, model.encoder.or(model.hidden.map(|_| t.encoder.variant))) {
        (Some(d), _) => t.dim = d,
        // keep the node dimension consistent with a changed LSTM shape
        (None, Some(EncoderVariant::Lstm)) => t.dim = t.encoder.hidden,
        (None, Some(EncoderVariant::BiLstm)) => t.dim = 2 * t.encoder.hidden,
        _ => {}
    }
    if let Some(x) = model.max_epochs {
        t.max_epochs = x;
        t.patience = t.patience.min(x);
    }
    if let Some(x) = model.patience {
        t.patience = x;
    }
    if let Some(x) = model.learning_rate {
        t.learning_rate = x;
    }
    if let Some(x) = model.batch_size {
        t.batch_size = x;
    }
    if let Some(x) = model.negatives {
        t.negatives_per_positive = x;
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    args: &'a [String],
    seed: u64,
    config: &'a RunConfig,
    outputs: Vec<PathBuf>,
}

fn write_manifest(path: &Path, command: &str, argv: &[String], config: &RunConfig, outputs: &[&Path]) -> Result<()> {
    let manifest = Manifest {
        command,
        version: VERSION,
        args: argv,
        seed: config.seed,
        config,
        outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing manifest {}", path.display()))
}

/// `<file>.manifest.json` next to a single-file output.
fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn read_corpus(config: &RunConfig) -> Result<Corpus> {
    let path = &config.paths.corpus;
    let (corpus, report) = load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))?;
    if report.dropped_users > 0 || report.dropped_mentions > 0 {
        log::warn!(
            "{}: dropped {} users without a description and {} unresolved mentions",
            path.display(),
            report.dropped_users,
            report.dropped_mentions
        );
    }
    Ok(corpus)
}

fn read_weak(config: &RunConfig, corpus: &Corpus) -> Result<WeakLabeling> {
    match &config.weak_labels {
        Some(path) if path.exists() => {
            WeakLabeling::read_jsonl(corpus, path).with_context(|| format!("loading weak labels {}", path.display()))
        }
        _ => {
            let path = &config.paths.rules;
            let rules = load_rules(path).with_context(|| format!("loading rules {}", path.display()))?;
            Ok(label_corpus(&rules, corpus)?)
        }
    }
}

fn read_vectors(config: &RunConfig) -> Result<VocabEmbeddings> {
    let path = &config.paths.word_vectors;
    load_word_vectors(path, config.word_vector_dim).with_context(|| format!("loading word vectors {}", path.display()))
}

fn synth(a: SynthArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    let s = &mut config.synth;
    if let Some(n) = a.n {
        s.n_users = n;
    }
    if let Some(x) = a.separation {
        s.separation = x;
    }
    if let Some(x) = a.coverage {
        s.desc_keyword_coverage = x;
    }
    if let Some(x) = a.homophily {
        s.homophily = x;
    }
    if let Some(x) = a.keyword_noise {
        s.keyword_noise = x;
    }
    if let Some(p) = a.out {
        config.paths.corpus = p;
    }
    if let Some(p) = a.vectors {
        config.paths.word_vectors = p;
    }
    if let Some(d) = a.vector_dim {
        config.word_vector_dim = d;
    }
    let params = config.synth_params();
    let corpus = generate_synthetic(&params)?;
    let out = &config.paths.corpus;
    ensure_parent(out)?;
    corpus.write_jsonl(out)?;
    let vectors = &config.paths.word_vectors;
    ensure_parent(vectors)?;
    synthetic_word_vectors(&params, config.word_vector_dim)?.write_text(vectors)?;
    write_manifest(&manifest_beside(out), "synth", argv, &config, &[out, vectors])?;
    println!("wrote {} users to {}", corpus.len(), out.display());
    Ok(())
}

fn weaklabel(a: WeaklabelArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    if let Some(p) = a.corpus {
        config.paths.corpus = p;
    }
    if let Some(p) = a.rules {
        config.paths.rules = p;
    }
    let out = match a.out.or_else(|| config.weak_labels.clone()) {
        Some(p) => p,
        None => bail!("no output path: pass --out or set weak_labels in the config"),
    };
    let corpus = read_corpus(&config)?;
    let rules = load_rules(&config.paths.rules).with_context(|| format!("loading rules {}", config.paths.rules.display()))?;
    let weak = label_corpus(&rules, &corpus)?;
    ensure_parent(&out)?;
    weak.write_jsonl(&corpus, &out)?;
    config.weak_labels = Some(out.clone());
    write_manifest(&manifest_beside(&out), "weaklabel", argv, &config, &[&out])?;
    println!(
        "coverage {:.4} (labeled {}, conflicted {}, unlabeled {} of {})",
        weak.coverage(),
        weak.len(),
        weak.conflict_count(),
        weak.unlabeled_count(),
        corpus.len()
    );
    if let Ok(q) = assess_quality(&weak, &corpus) {
        println!(
            "weak-label quality on {} gold users: accuracy {:.4}, macro-F1 {:.4}",
            q.n_overlap, q.accuracy, q.macro_f1
        );
    }
    Ok(())
}

fn build_graph_cmd(a: BuildGraphArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    if let Some(v) = a.view {
        config.view = v;
    }
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let graph = build_graph(&corpus, &weak, config.view)?;
    ensure_parent(&a.out)?;
    graph.write_json(&corpus, &a.out)?;
    write_manifest(&manifest_beside(&a.out), "build-graph", argv, &config, &[&a.out])?;
    let stats = graph.stats();
    println!("{} nodes, {} edges ({})", stats.nodes(), stats.edges(), config.view.name());
    Ok(())
}

fn train(a: TrainArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    apply_model(&mut config, &a.model);
    if let Some(d) = a.out_dir {
        config.paths.output_dir = d;
    }
    config.validate()?;
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let vocab = read_vectors(&config)?;
    let graph = build_graph(&corpus, &weak, config.view)?;
    let train = config.em_config().train;
    let (space, history) = train_embeddings(&graph, &corpus, &vocab, &train)?;
    let dir = config.paths.output_dir.clone();
    ensure_dir(&dir)?;
    let (space_path, loss_path, graph_path) = (dir.join("space.json"), dir.join("loss.csv"), dir.join("graph.json"));
    space.write_json(&space_path)?;
    write_loss_csv(&history, &loss_path)?;
    graph.write_json(&corpus, &graph_path)?;
    write_manifest(&dir.join("train.manifest.json"), "train", argv, &config, &[&space_path, &loss_path, &graph_path])?;
    if let Some(last) = history.last() {
        println!("trained {} epochs, final loss {:.6}", last.epoch, last.loss.total);
    }
    Ok(())
}

fn em(a: EmArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    apply_model(&mut config, &a.model);
    if let Some(k) = a.k {
        config.em.k = k;
    }
    if let Some(x) = a.churn_threshold {
        config.em.churn_threshold = x;
    }
    if let Some(x) = a.ensemble_size {
        config.em.ensemble_size = x;
    }
    if let Some(x) = a.max_iterations {
        config.em.max_iterations = x;
    }
    if a.cold_restart {
        config.em.warm_start = false;
    }
    if let Some(d) = a.out_dir {
        config.paths.output_dir = d;
    }
    config.validate()?;
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let vocab = read_vectors(&config)?;
    let out = run_em(&corpus, &weak, &vocab, &config.em_config(), config.view)?;

    let dir = config.paths.output_dir.clone();
    ensure_dir(&dir)?;
    let report_path = dir.join("em_report.json");
    let promotions_path = dir.join("promotions.csv");
    let graph_path = dir.join("graph.json");
    let space_path = dir.join("space.json");
    out.report.write_json(&report_path)?;
    out.report.write_promotions_csv(&promotions_path)?;
    out.graph.write_json(&corpus, &graph_path)?;
    out.space.write_json(&space_path)?;
    let mut outputs = vec![report_path.as_path(), &promotions_path, &graph_path, &space_path];
    let metrics_path = dir.join("metrics.json");
    let options = EvalOptions {
        include_weak: config.include_weak_in_eval,
    };
    match evaluate(&out.report, &corpus, &weak, options) {
        Ok(r) => {
            let r = r.with_fingerprint(config.fingerprint()?);
            r.write_json(&metrics_path)?;
            outputs.push(&metrics_path);
            print_metrics(&r);
        }
        Err(usertype::Error::EmptyEvaluation(_)) => log::warn!("no gold labels; metrics skipped"),
        Err(e) => return Err(e.into()),
    }
    write_manifest(&dir.join("em.manifest.json"), "em", argv, &config, &outputs)?;
    println!(
        "{} iterations ({:?}), {} promotions, {} edges",
        out.report.iterations_run,
        out.report.stop_reason,
        out.report.promotions().count(),
        out.report.final_graph.edges()
    );
    Ok(())
}

fn baseline(a: BaselineArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    if let Some(d) = a.out_dir {
        config.paths.output_dir = d;
    }
    let mut train = TrainConfig {
        seed: config.seed,
        ..TrainConfig::baseline()
    };
    if let Some(h) = a.hidden {
        train.encoder.hidden = h;
        train.dim = h;
    }
    if let Some(e) = a.epochs {
        train.max_epochs = e;
        train.patience = e;
    }
    if let Some(lr) = a.learning_rate {
        train.learning_rate = lr;
    }
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let vocab = read_vectors(&config)?;
    let (model, history) = train_supervised_baseline(&corpus, &weak, &vocab, &train)?;
    let dir = config.paths.output_dir.clone();
    ensure_dir(&dir)?;
    let model_path = dir.join("baseline.json");
    let history_path = dir.join("baseline_history.csv");
    model.write_json(&model_path)?;
    let mut csv = String::from("epoch,train_loss,validation_loss\n");
    for h in &history {
        csv.push_str(&format!("{},{},{}\n", h.epoch, h.train_loss, h.validation_loss));
    }
    std::fs::write(&history_path, csv)?;
    let mut outputs = vec![model_path.as_path(), &history_path];
    let metrics_path = dir.join("baseline_metrics.json");
    let options = EvalOptions {
        include_weak: config.include_weak_in_eval,
    };
    if let Ok(r) = evaluate(&model, &corpus, &weak, options) {
        r.write_json(&metrics_path)?;
        outputs.push(&metrics_path);
        print_metrics(&r);
    }
    write_manifest(&dir.join("baseline.manifest.json"), "baseline", argv, &config, &outputs)?;
    Ok(())
}

fn eval(a: EvalArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    if a.exclude_weak {
        config.include_weak_in_eval = false;
    }
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let classifier: Box<dyn UserClassifier> = match (&a.report, &a.classifier) {
        (_, Some(path)) => Box::new(
            SupervisedClassifier::read_json(path).with_context(|| format!("loading classifier {}", path.display()))?,
        ),
        (report, None) => {
            let path = report.clone().unwrap_or_else(|| config.paths.output_dir.join("em_report.json"));
            Box::new(EmRunReport::read_json(&path).with_context(|| format!("loading report {}", path.display()))?)
        }
    };
    let options = EvalOptions {
        include_weak: config.include_weak_in_eval,
    };
    let report = evaluate(classifier.as_ref(), &corpus, &weak, options)?.with_fingerprint(config.fingerprint()?);
    let out = a.out.unwrap_or_else(|| config.paths.output_dir.join("metrics.json"));
    ensure_parent(&out)?;
    report.write_json(&out)?;
    write_manifest(&manifest_beside(&out), "eval", argv, &config, &[&out])?;
    print_metrics(&report);
    Ok(())
}

fn ablation(a: AblationArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    apply_model(&mut config, &a.model);
    if let Some(d) = a.out_dir {
        config.paths.output_dir = d;
    }
    config.validate()?;
    let corpus = read_corpus(&config)?;
    let weak = read_weak(&config, &corpus)?;
    let vocab = read_vectors(&config)?;
    let options = EvalOptions {
        include_weak: config.include_weak_in_eval,
    };
    let rows = run_ablation(&corpus, &weak, &vocab, &config.em_config(), options)?;
    let dir = config.paths.output_dir.clone();
    ensure_dir(&dir)?;
    let csv_path = dir.join("ablation.csv");
    let json_path = dir.join("ablation.json");
    write_ablation_csv(&rows, &csv_path)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(&rows)?)?;
    write_manifest(&dir.join("ablation.manifest.json"), "ablation", argv, &config, &[&csv_path, &json_path])?;
    for r in &rows {
        println!(
            "{:<18} {:<8} accuracy {:.4}  macro-F1 {:.4}",
            r.model.name(),
            r.view.name(),
            r.eval.accuracy,
            r.eval.macro_f1
        );
    }
    Ok(())
}

fn export(a: ExportArgs, argv: &[String]) -> Result<()> {
    let mut config = load_config(&a.cfg)?;
    apply_inputs(&mut config, &a.input);
    let dir = &config.paths.output_dir;
    let space_path = a.space.clone().unwrap_or_else(|| dir.join("space.json"));
    let graph_path = a.graph.clone().unwrap_or_else(|| dir.join("graph.json"));
    let corpus = read_corpus(&config)?;
    let space = EmbeddingSpace::read_json(&space_path).with_context(|| format!("loading space {}", space_path.display()))?;
    let graph = InfoGraph::read_json(&graph_path).with_context(|| format!("loading graph {}", graph_path.display()))?;
    let inputs = space.user_inputs(&corpus)?;
    let predictions = usertype::em::predict_types(&space, &corpus, &inputs)?;
    ensure_parent(&a.out)?;
    let rows = export_embeddings(&space, &graph, &corpus, &inputs, &predictions, &a.out)?;
    write_manifest(&manifest_beside(&a.out), "export", argv, &config, &[&a.out])?;
    println!("wrote {rows} node vectors to {}", a.out.display());
    Ok(())
}

fn print_metrics(r: &EvalReport) {
    println!(
        "evaluated {} users: accuracy {:.4}, macro-F1 {:.4}",
        r.n_eval, r.accuracy, r.macro_f1
    );
}
