mod config;
mod outputs;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use reviewfix::backend::{
    Backend, BackendError, Completion, CompletionBackend, CompletionRequest, OracleBackend, RemoteBackend, RemoteConfig,
    DEFAULT_MAX_OUTPUT_TOKENS, DEFAULT_RETRIES,
};
use reviewfix::codebleu::{CodeBleuError, Weights};
use reviewfix::codenorm;
use reviewfix::corpus::{self, Corpus, CorpusError, PruneConfig, Source};
use reviewfix::evaluator::report::{table1, table2, table3, table4, table5, Layout, ModelSummaries, Table};
use reviewfix::evaluator::{
    cross_dataset, per_rule_breakdown, run_kind, summarize, CrossCell, EvalError, EvalSummary, RunArtifact, RunConfig,
};
use reviewfix::io::{self as rio, IoError};
use reviewfix::prompt::{export_finetune, render_prompt, PromptError, PromptKind};

use config::Config;
use outputs::Cleanup;

const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
const DEFAULT_SPLIT_RATIO: f64 = 0.9;
const DEFAULT_SPLIT_SEED: u64 = 42;
const DEFAULT_CONCURRENCY: usize = 4;

/// A problem with the inputs or configuration (exit code 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Completions could not be obtained (exit code 3).
#[derive(Debug)]
struct BackendFailure(String);

impl std::fmt::Display for BackendFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BackendFailure {}

#[derive(Parser)]
#[command(name = "reviewfix", version, about = "Evaluate LLM program repair guided by review comments")]
struct Cli {
    /// TOML run manifest; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a raw corpus file and write it in normalized form.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop instances with no shared line, a trivial comment, or equal normalized code.
    Prune {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the drop report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Comment text treated as carrying no repair information (repeatable).
        #[arg(long = "trivial-comment")]
        trivial_comments: Vec<String>,
    },
    /// Seeded train/test split.
    Split {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Render one prompt per instance as JSON lines.
    Render {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        prompt: PromptKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a backend for every instance and prompt kind, then score.
    Run(Box<RunArgs>),
    /// Score model outputs supplied as `{"instance_id", "output"}` lines.
    Score {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        prompt: PromptKind,
        #[arg(long)]
        outputs: PathBuf,
        /// Name recorded as the backend of the scored run.
        #[arg(long, default_value = "outputs")]
        label: String,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Build result tables from summaries or run artifacts.
    Report(ReportArgs),
    /// Write prompt/completion pairs for finetuning.
    ExportFinetune {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        prompt: PromptKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Show how a snippet is parsed and normalized; with a reference, whether they match.
    NormalizeDebug {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Corpus file as SOURCE=PATH, e.g. rd=data/rd.jsonl (repeatable).
    #[arg(long = "corpus", value_parser = parse_corpus_arg)]
    corpora: Vec<(Source, PathBuf)>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Prompt kinds, e.g. p3,p7 (repeatable or comma-separated).
    #[arg(long = "prompt", value_delimiter = ',')]
    prompts: Vec<PromptKind>,
    /// golden, identity, replay or remote.
    #[arg(long)]
    backend: Option<String>,
    /// Chat-completions base URL.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    system_prompt: Option<String>,
    /// Maximum concurrent requests.
    #[arg(long)]
    concurrency: Option<usize>,
    #[arg(long)]
    retries: Option<u32>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// Record store; replays from it with `--backend replay`, records into it otherwise.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Backend id to serve when the store holds several.
    #[arg(long)]
    replay_as: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_output_tokens: Option<u32>,
    #[arg(long = "stop")]
    stop: Vec<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Keep runs in which some completions failed.
    #[arg(long)]
    allow_errors: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// MODEL=PATH of a summary or run artifact (repeatable).
    #[arg(long = "summary", value_parser = parse_labelled)]
    summaries: Vec<(String, PathBuf)>,
    /// Run artifact for the per-rule table (repeatable).
    #[arg(long = "run")]
    runs: Vec<PathBuf>,
    /// MODEL:TEST=PATH run artifact for the cross-dataset table (repeatable).
    #[arg(long = "cell", value_parser = parse_cell)]
    cells: Vec<(String, String, PathBuf)>,
    #[arg(long, value_parser = ["table1", "table2", "table3", "table4", "table5"])]
    style: String,
    /// csv, json or text.
    #[arg(long)]
    format: Option<Layout>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_corpus_arg(s: &str) -> Result<(Source, PathBuf), String> {
    let (source, path) = s.split_once('=').ok_or_else(|| format!("expected SOURCE=PATH, got `{s}`"))?;
    Ok((source.parse()?, PathBuf::from(path)))
}

fn parse_labelled(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.into(), PathBuf::from(path))),
        _ => Err(format!("expected MODEL=PATH, got `{s}`")),
    }
}

fn parse_cell(s: &str) -> Result<(String, String, PathBuf), String> {
    let (label, path) = parse_labelled(s)?;
    match label.split_once(':') {
        Some((m, t)) if !m.is_empty() && !t.is_empty() => Ok((m.into(), t.into(), path)),
        _ => Err(format!("expected MODEL:TEST=PATH, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match Config::load(cli.config.as_deref()).and_then(|config| dispatch(cli.command, &config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if cause.is::<BackendFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<CorpusError>() {
            return match e {
                CorpusError::Io(io) => io_code(io),
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<PromptError>() {
            return match e {
                PromptError::Io(io) => io_code(io),
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::Backend(b) => backend_code(b),
                EvalError::Io(io) => io_code(io),
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<BackendError>() {
            return backend_code(e);
        }
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return io_code(e);
        }
        if cause.is::<CodeBleuError>() {
            return 2;
        }
    }
    4
}

fn io_code(e: &IoError) -> u8 {
    if e.source.kind() == std::io::ErrorKind::NotFound {
        2
    } else {
        4
    }
}

fn backend_code(e: &BackendError) -> u8 {
    match e {
        BackendError::Config(_) | BackendError::InvalidRequest(_) | BackendError::Store { .. } => 2,
        _ => 3,
    }
}

fn dispatch(command: Command, config: &Config) -> Result<()> {
    match command {
        Command::Ingest { input, source, out } => ingest(&input, source, &out),
        Command::Prune { corpus, out, report, trivial_comments } => {
            let corpus = load(&corpus, config)?;
            let trivial = if !trivial_comments.is_empty() {
                trivial_comments
            } else {
                config.prune.trivial_comments.clone().unwrap_or_else(|| PruneConfig::default().trivial_comments)
            };
            let (kept, summary) = corpus::prune(&corpus, &PruneConfig { trivial_comments: trivial });
            let mut cleanup = Cleanup::default();
            cleanup.file(&out);
            kept.save(&out)?;
            if let Some(path) = report {
                cleanup.file(&path);
                rio::write_atomic(&path, rio::to_pretty_json(&summary).as_bytes())?;
            }
            cleanup.commit();
            print!("{}", summary.summary());
            Ok(())
        }
        Command::Split { corpus, ratio, seed, train_out, test_out } => {
            let corpus = load(&corpus, config)?;
            let ratio = ratio.or(config.split.ratio).unwrap_or(DEFAULT_SPLIT_RATIO);
            let seed = seed.or(config.split.seed).unwrap_or(DEFAULT_SPLIT_SEED);
            let (train, test) = corpus::split(&corpus, ratio, seed)?;
            let mut cleanup = Cleanup::default();
            cleanup.file(&train_out);
            cleanup.file(&test_out);
            train.save(&train_out)?;
            test.save(&test_out)?;
            cleanup.commit();
            println!("train {}\ntest {}", train.len(), test.len());
            Ok(())
        }
        Command::Render { corpus, prompt, out } => {
            let corpus = load(&corpus, config)?;
            let mut rendered = Vec::with_capacity(corpus.len());
            let mut failures = Vec::new();
            for inst in &corpus.instances {
                match render_prompt(inst, prompt) {
                    Ok(p) => rendered.push(p),
                    Err(e) => failures.push(e.to_string()),
                }
            }
            if !failures.is_empty() {
                for f in failures.iter().take(10) {
                    eprintln!("  {f}");
                }
                bail!(Invalid(format!("{} of {} instances cannot be rendered as {prompt}", failures.len(), corpus.len())));
            }
            rio::write_atomic(&out, rio::to_jsonl(&rendered).as_bytes())?;
            println!("rendered {} {prompt} prompts", rendered.len());
            Ok(())
        }
        Command::Run(args) => run(*args, config),
        Command::Score { corpus, prompt, outputs, label, model, out_dir } => {
            let corpus = load(&corpus, config)?;
            let answers = load_outputs(&outputs)?;
            let backend = Backend::new(FileOutputs { id: label, answers });
            let run_config = RunConfig {
                model_id: model.or(config.backend.model.clone()).unwrap_or_else(|| RunConfig::default().model_id),
                weights: weights(config)?,
                ..RunConfig::default()
            };
            let out_dir = out_dir.or(config.out_dir.clone());
            let mut cleanup = Cleanup::default();
            if let Some(d) = &out_dir {
                cleanup.dir(d);
            }
            let artifact = run_kind(&corpus, prompt, &backend, &RunConfig { out_dir: out_dir.clone(), ..run_config })?;
            let summary = summarize(&artifact);
            if let Some(d) = &out_dir {
                write_summary(d, &artifact.run_id, &summary)?;
            }
            cleanup.commit();
            print_summary(&summary);
            Ok(())
        }
        Command::Report(args) => report(args, config),
        Command::ExportFinetune { corpus, prompt, out } => {
            let corpus = load(&corpus, config)?;
            let mut cleanup = Cleanup::default();
            cleanup.file(&out);
            let report = export_finetune(&corpus, prompt, &out)?;
            cleanup.commit();
            println!(
                "wrote {} {prompt} pairs to {} ({} skipped, see {})",
                report.written,
                report.data_path.display(),
                report.skipped.len(),
                report.skip_report_path.display()
            );
            Ok(())
        }
        Command::NormalizeDebug { code, reference } => {
            let code_text = rio::read_to_string(&code)?;
            print!("{}", codenorm::debug_report(&code_text));
            if let Some(reference) = reference {
                let ref_text = rio::read_to_string(&reference)?;
                println!("--- reference");
                print!("{}", codenorm::debug_report(&ref_text));
                println!("--- exact match: {}", codenorm::ecm(&code_text, &ref_text));
            }
            Ok(())
        }
    }
}

fn ingest(input: &Path, source: Source, out: &Path) -> Result<()> {
    let corpus = corpus::load_corpus(input, source).with_context(|| format!("ingesting {}", input.display()))?;
    corpus.save(out)?;
    println!("ingested {} instances from {} ({source})", corpus.len(), input.display());
    Ok(())
}

fn load(args: &CorpusArgs, config: &Config) -> Result<Corpus> {
    let inputs: Vec<(PathBuf, Source)> = if !args.corpora.is_empty() {
        args.corpora.iter().map(|(s, p)| (p.clone(), *s)).collect()
    } else {
        config
            .corpus
            .iter()
            .map(|c| c.source.parse::<Source>().map(|s| (c.path.clone(), s)).map_err(Invalid))
            .collect::<Result<_, _>>()?
    };
    if inputs.is_empty() {
        bail!(Invalid("no corpus given (use --corpus SOURCE=PATH or [[corpus]] in the config)".into()));
    }
    for (path, _) in &inputs {
        if !path.exists() {
            bail!(Invalid(format!("corpus file {} does not exist", path.display())));
        }
    }
    let corpus = corpus::load_many(&inputs)?;
    log::info!("loaded {} instances ({})", corpus.len(), corpus.source_label);
    Ok(corpus)
}

fn weights(config: &Config) -> Result<Weights> {
    match config.run.code_bleu_weights {
        Some(w) => Ok(Weights::new(w)?),
        None => Ok(Weights::default()),
    }
}

fn build_backend(args: &RunArgs, config: &Config) -> Result<Backend> {
    let b = &config.backend;
    let kind = args.backend.clone().or(b.kind.clone()).unwrap_or_else(|| "remote".into());
    let store = args.store.clone().or(b.store.clone());
    if kind == "replay" {
        let store = store.ok_or_else(|| Invalid("--backend replay needs --store".into()))?;
        if !store.exists() {
            bail!(Invalid(format!("store {} does not exist", store.display())));
        }
        return Ok(Backend::replay(&store, args.replay_as.as_deref().or(b.replay_as.as_deref()))?);
    }
    let inner: Box<dyn CompletionBackend> = match kind.as_str() {
        "golden" | "identity" => {
            let corpus = load(&args.corpus, config)?;
            Box::new(if kind == "golden" { OracleBackend::golden(&corpus) } else { OracleBackend::identity(&corpus) })
        }
        "remote" => {
            let env = args.api_key_env.clone().or(b.api_key_env.clone()).unwrap_or_else(|| DEFAULT_API_KEY_ENV.into());
            let api_key = std::env::var(&env).ok().filter(|k| !k.is_empty());
            if api_key.is_none() {
                log::warn!("{env} is not set; sending requests without credentials");
            }
            let mut rc = RemoteConfig { api_key, ..RemoteConfig::default() };
            if let Some(url) = args.endpoint.clone().or(b.endpoint.clone()) {
                rc.base_url = url;
            }
            rc.system_prompt = args.system_prompt.clone().or(b.system_prompt.clone());
            rc.retries = args.retries.or(b.retries).unwrap_or(DEFAULT_RETRIES);
            if let Some(t) = args.timeout_secs.or(b.timeout_secs) {
                rc.timeout = Duration::from_secs(t);
            }
            Box::new(RemoteBackend::new(rc)?)
        }
        other => bail!(Invalid(format!("unknown backend `{other}` (golden, identity, replay, remote)"))),
    };
    Ok(match store {
        Some(store) => Backend::recording(BoxedBackend(inner), &store)?,
        None => Backend::new(BoxedBackend(inner)),
    })
}

struct BoxedBackend(Box<dyn CompletionBackend>);

impl CompletionBackend for BoxedBackend {
    fn id(&self) -> String {
        self.0.id()
    }

    fn call(&self, request: &CompletionRequest, cache_key: &str) -> Result<Completion, BackendError> {
        self.0.call(request, cache_key)
    }
}

/// Serves pre-computed answers keyed by instance id.
struct FileOutputs {
    id: String,
    answers: HashMap<String, String>,
}

impl CompletionBackend for FileOutputs {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn call(&self, request: &CompletionRequest, _: &str) -> Result<Completion, BackendError> {
        let id = &request.request_tag.instance_id;
        let text = self.answers.get(id).ok_or_else(|| BackendError::UnknownInstance(id.clone()))?;
        Ok(Completion { text: text.clone(), latency_ms: Some(0) })
    }
}

#[derive(serde::Deserialize)]
struct OutputLine {
    instance_id: String,
    output: String,
}

fn load_outputs(path: &Path) -> Result<HashMap<String, String>> {
    let text = rio::read_to_string(path)?;
    let mut answers = HashMap::new();
    for (line, raw) in rio::jsonl_lines(&text) {
        let o: OutputLine =
            serde_json::from_str(raw).map_err(|e| Invalid(format!("{}: line {line}: {e}", path.display())))?;
        if answers.insert(o.instance_id.clone(), o.output).is_some() {
            bail!(Invalid(format!("{}: line {line}: duplicate instance_id {:?}", path.display(), o.instance_id)));
        }
    }
    Ok(answers)
}

fn summary_path(dir: &Path, run_id: &str) -> PathBuf {
    dir.join(format!("summary-{run_id}.json"))
}

fn write_summary(dir: &Path, run_id: &str, summary: &EvalSummary) -> Result<PathBuf> {
    let path = summary_path(dir, run_id);
    rio::write_atomic(&path, rio::to_pretty_json(summary).as_bytes())?;
    Ok(path)
}

fn print_summary(s: &EvalSummary) {
    let kind = s.kind.map(|k| k.to_string()).unwrap_or_default();
    println!(
        "{kind} {}: n={} ECM {}% (raw {}%) CodeBLEU {:.4} errors {}",
        s.label, s.n, s.ecm_rate, s.ecm_rate_raw, s.mean_code_bleu, s.errors
    );
}

fn run(args: RunArgs, config: &Config) -> Result<()> {
    let corpus = load(&args.corpus, config)?;
    let prompts: Vec<PromptKind> = if !args.prompts.is_empty() {
        args.prompts.clone()
    } else if let Some(p) = &config.run.prompts {
        p.iter().map(|s| s.parse::<PromptKind>()).collect::<Result<_, _>>()?
    } else {
        bail!(Invalid("no prompt kinds given (use --prompt or run.prompts in the config)".into()));
    };
    let concurrency = args.concurrency.or(config.backend.concurrency).unwrap_or(DEFAULT_CONCURRENCY);
    if concurrency == 0 {
        bail!(Invalid("concurrency must be at least 1".into()));
    }
    let out_dir = args
        .out_dir
        .clone()
        .or(config.out_dir.clone())
        .ok_or_else(|| Invalid("no output directory (use --out-dir or out_dir in the config)".into()))?;
    let s = &config.sampling;
    let run_config = RunConfig {
        model_id: args.model.clone().or(config.backend.model.clone()).unwrap_or_else(|| RunConfig::default().model_id),
        temperature: args.temperature.or(s.temperature).unwrap_or(0.0),
        max_output_tokens: args.max_output_tokens.or(s.max_output_tokens).unwrap_or(DEFAULT_MAX_OUTPUT_TOKENS),
        stop_sequences: if !args.stop.is_empty() { args.stop.clone() } else { s.stop.clone().unwrap_or_default() },
        concurrency,
        weights: weights(config)?,
        out_dir: Some(out_dir.clone()),
        ..RunConfig::default()
    };
    let backend = build_backend(&args, config)?;

    let mut cleanup = Cleanup::default();
    cleanup.dir(&out_dir);
    for kind in prompts {
        let artifact = run_kind(&corpus, kind, &backend, &run_config)?;
        let summary = summarize(&artifact);
        let backend_errors = artifact.records.iter().filter(|r| r.error.as_deref().is_some_and(|e| e.starts_with("backend:"))).count();
        if backend_errors > 0 && !args.allow_errors {
            let first = artifact.records.iter().find_map(|r| r.error.clone()).unwrap_or_default();
            bail!(BackendFailure(format!(
                "{kind}: {backend_errors} of {} completions failed (first: {first}); rerun, or pass --allow-errors to keep partial runs",
                artifact.records.len()
            )));
        }
        let path = write_summary(&out_dir, &artifact.run_id, &summary)?;
        log::info!("{kind}: summary in {}", path.display());
        print_summary(&summary);
    }
    cleanup.commit();
    Ok(())
}

fn load_summary(path: &Path) -> Result<EvalSummary> {
    let text = rio::read_to_string(path)?;
    if let Ok(s) = serde_json::from_str::<EvalSummary>(&text) {
        return Ok(s);
    }
    let run: RunArtifact = serde_json::from_str(&text)
        .map_err(|e| Invalid(format!("{}: neither a summary nor a run artifact ({e})", path.display())))?;
    Ok(summarize(&run))
}

fn load_run(path: &Path) -> Result<RunArtifact> {
    Ok(RunArtifact::load(path)?)
}

fn report(args: ReportArgs, config: &Config) -> Result<()> {
    let layout = match args.format {
        Some(l) => l,
        None => config.format.as_deref().unwrap_or("text").parse::<Layout>().map_err(Invalid)?,
    };
    let table: Table = match args.style.as_str() {
        "table3" => {
            if args.runs.is_empty() {
                bail!(Invalid("table3 needs --run PATH for each run".into()));
            }
            let runs = args.runs.iter().map(|p| load_run(p)).collect::<Result<Vec<_>>>()?;
            table3(&per_rule_breakdown(&runs.iter().collect::<Vec<_>>())?)
        }
        "table5" => {
            if args.cells.is_empty() {
                bail!(Invalid("table5 needs --cell MODEL:TEST=PATH for each run".into()));
            }
            let runs = args.cells.iter().map(|(_, _, p)| load_run(p)).collect::<Result<Vec<_>>>()?;
            let cells: Vec<CrossCell> = args
                .cells
                .iter()
                .zip(&runs)
                .map(|((m, t, _), run)| CrossCell { model: m.clone(), test_corpus: t.clone(), run })
                .collect();
            table5(&cross_dataset(&cells)?)
        }
        style => {
            if args.summaries.is_empty() {
                bail!(Invalid(format!("{style} needs --summary MODEL=PATH for each run")));
            }
            let mut models: Vec<ModelSummaries> = Vec::new();
            for (model, path) in &args.summaries {
                let s = load_summary(path)?;
                let kind = s.kind.ok_or_else(|| Invalid(format!("{}: summary has no prompt kind", path.display())))?;
                let idx = match models.iter().position(|m| &m.model == model) {
                    Some(i) => i,
                    None => {
                        models.push(ModelSummaries { model: model.clone(), summaries: BTreeMap::new() });
                        models.len() - 1
                    }
                };
                if models[idx].summaries.insert(kind, s).is_some() {
                    bail!(Invalid(format!("two {kind} summaries for model {model}")));
                }
            }
            match style {
                "table1" => table1(&models),
                "table2" => table2(&models)?,
                _ => table4(&models)?,
            }
        }
    };
    let text = table.render(layout);
    match args.out {
        Some(path) => rio::write_atomic(&path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
