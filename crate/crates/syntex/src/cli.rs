//! The `syntex` command line: one subcommand per pipeline step.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 backend
//! unavailable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use syntex_core::bench::{DialectBenchmark, TaggingBenchmark, TuningBenchmark, POOL_REAL};
use syntex_core::corpus::{CorpusError, DisclaimerPolicy};
use syntex_core::generator::GenerateError;
use syntex_core::harness::{
    crossover_analysis, group_regression, score_groups, zero_shot_train, CurveSpec, HarnessError, Task,
};
use syntex_core::linear::{auc, fit, EvalSplit, LinearError};
use syntex_core::ngram::{AdaptationParams, LmError};
use syntex_core::prompt::{si_b_news, ExpandMode, PromptError, PromptInstance, PromptTemplate};
use syntex_core::rng::derive_seed;
use syntex_core::tagger::{bio_to_spans, span_f1, PerceptronTagger, TaggedSequence, TaggerError};
use syntex_core::tuner::{Axes, GridConfig, LocalFactory, TuneConfig, TuneError, AXIS_TEMPERATURE};
use syntex_core::{tokenize, Corpus, LocalBackend, NGramModel, Prompt, SamplingParams};
use thiserror::Error;

use crate::config::{
    file_sha256, resolve, AdaptConfig, AxesSpec, BackendKind, BenchConfig, CurveConfig, DisclaimerConfig,
    GenerateConfig, HyperConfig, ReferenceConfig, RunConfig, SamplingConfig, ScoreSpansConfig, TagConfig,
    TrainLmConfig, TuneBlock, ZeroShotConfig,
};
use crate::formats::{self, FormatError};
use crate::jsonl::{self, JsonlError};
use crate::parallel;
use crate::remote::{RemoteBackend, RemoteFactory};
use crate::report;

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    TrainLm,
    Adapt,
    Generate,
    ExpandPrompts,
    Tune,
    TrainClf,
    Curve,
    ZeroShot,
    Tag,
    ScoreSpans,
    ScoreGroups,
    /// Writes the shipped benchmark corpora and ready-to-run configs.
    Bench,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Local,
    Remote,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "syntex", version, about = "Synthetic text generation, tuning and evaluation")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run config. Optional only for `bench`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long)]
    pub backend_url: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("backend unavailable: {0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Backend(_) => 4,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

impl From<JsonlError> for CliError {
    fn from(e: JsonlError) -> Self {
        data_err(e)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        data_err(e)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        data_err(e)
    }
}

impl From<LmError> for CliError {
    fn from(e: LmError) -> Self {
        match e {
            LmError::InvalidOrder | LmError::InvalidDiscount(_) | LmError::InvalidMixWeight(_) => config_err(e),
            _ => data_err(e),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Backend(b) => CliError::Backend(b.to_string()),
            GenerateError::InvalidParams(_) | GenerateError::InvalidCount => config_err(e),
            GenerateError::Corpus(c) => data_err(c),
        }
    }
}

impl From<TuneError> for CliError {
    fn from(e: TuneError) -> Self {
        match e {
            TuneError::Generate(g) => g.into(),
            TuneError::Model(m) => m.into(),
            TuneError::Fit(_) | TuneError::InsufficientRealDocs { .. } => data_err(e),
            _ => config_err(e),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidSizes | HarnessError::NoReplicates | HarnessError::NoPools | HarnessError::UnknownReference(..) => {
                config_err(e)
            }
            _ => data_err(e),
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        data_err(e)
    }
}

impl From<LinearError> for CliError {
    fn from(e: LinearError) -> Self {
        match e {
            LinearError::InvalidSplit(_) => config_err(e),
            _ => data_err(e),
        }
    }
}

impl From<TaggerError> for CliError {
    fn from(e: TaggerError) -> Self {
        data_err(e)
    }
}

#[derive(Debug, Clone, Serialize)]
struct FileRecord {
    path: String,
    sha256: String,
}

/// Everything one invocation reads and writes.
struct Ctx {
    cfg: RunConfig,
    seed: u64,
    base: PathBuf,
    out: PathBuf,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
}

impl Ctx {
    /// Resolves an input path and checks that it exists.
    fn input(&mut self, path: &Path) -> Result<PathBuf, CliError> {
        let full = resolve(&self.base, path);
        let bytes = fs::read(&full).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let record = FileRecord { path: path.display().to_string(), sha256: file_sha256(&bytes) };
        if !self.inputs.iter().any(|r| r.path == record.path) {
            self.inputs.push(record);
        }
        Ok(full)
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| data_err(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, content).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        self.outputs.retain(|r| r.path != name);
        self.outputs.push(FileRecord { path: name.to_string(), sha256: file_sha256(content.as_bytes()) });
        Ok(())
    }

    /// The only way a corpus reaches the disk; the writer re-validates every document.
    fn write_corpus(&mut self, name: &str, corpus: &Corpus) -> Result<(), CliError> {
        let text = jsonl::to_jsonl(corpus)?;
        self.write(name, &text)
    }

    fn corpus(&mut self, path: &Path) -> Result<Corpus, CliError> {
        let full = self.input(path)?;
        Ok(jsonl::load_jsonl(&full)?)
    }

    fn nglm(&mut self, path: &Path) -> Result<NGramModel, CliError> {
        let full = self.input(path)?;
        Ok(formats::load_nglm(&full)?)
    }

    fn json(&mut self, path: &Path) -> Result<Value, CliError> {
        let full = self.input(path)?;
        let text = fs::read_to_string(&full).map_err(data_err)?;
        serde_json::from_str(&text).map_err(|e| data_err(format!("{}: {e}", path.display())))
    }

    fn block<'a, T>(&self, block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        block.as_ref().ok_or_else(|| CliError::Config(format!("config has no `{name}` block")))
    }

    fn remote(&self) -> Result<RemoteBackend, CliError> {
        let b = &self.cfg.backend;
        let url = b.url.as_deref().ok_or_else(|| config_err("remote backend needs a URL (--backend-url)"))?;
        Ok(RemoteBackend::new(url, &b.model).with_retries(b.retries, Duration::from_millis(b.backoff_ms)))
    }
}

/// Parses, applies flag overrides and runs one subcommand.
pub fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let (mut cfg, base) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let cfg = RunConfig::from_json(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None if args.command == Command::Bench => (RunConfig::default(), PathBuf::new()),
        None => return Err(config_err("--config is required")),
    };
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(b) = args.backend {
        cfg.backend.kind = match b {
            BackendArg::Local => BackendKind::Local,
            BackendArg::Remote => BackendKind::Remote,
        };
    }
    if let Some(u) = &args.backend_url {
        cfg.backend.url = Some(u.clone());
    }
    let seed = cfg.seed.ok_or_else(|| config_err("a seed is required (config `seed` or --seed)"))?;
    let out = match (&args.out, &cfg.out_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => resolve(&base, o),
        (None, None) => base.join("out"),
    };
    fs::create_dir_all(&out).map_err(|e| config_err(format!("cannot create {}: {e}", out.display())))?;
    let mut ctx = Ctx { cfg, seed, base, out, inputs: Vec::new(), outputs: Vec::new() };
    match args.command {
        Command::TrainLm => train_lm(&mut ctx)?,
        Command::Adapt => adapt(&mut ctx)?,
        Command::Generate => generate(&mut ctx)?,
        Command::ExpandPrompts => expand_prompts(&mut ctx)?,
        Command::Tune => tune(&mut ctx)?,
        Command::TrainClf => train_clf(&mut ctx)?,
        Command::Curve => curve(&mut ctx)?,
        Command::ZeroShot => zero_shot(&mut ctx)?,
        Command::Tag => tag(&mut ctx)?,
        Command::ScoreSpans => score_spans(&mut ctx)?,
        Command::ScoreGroups => score_groups_cmd(&mut ctx)?,
        Command::Bench => bench(&mut ctx)?,
    }
    write_manifest(&ctx, args.command)?;
    Ok(ctx.outputs.iter().map(|r| ctx.out.join(&r.path)).collect())
}

/// Runs with process-style arguments and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("syntex {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}

fn write_manifest(ctx: &Ctx, command: Command) -> Result<(), CliError> {
    let path = ctx.out.join(MANIFEST);
    let mut runs = match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str::<Value>(&text)
            .ok()
            .and_then(|v| v.get("runs").cloned())
            .and_then(|r| r.as_object().cloned())
            .unwrap_or_default(),
        Err(_) => serde_json::Map::new(),
    };
    let mut cfg = ctx.cfg.clone();
    cfg.out_dir = None;
    let entry = serde_json::json!({
        "config": cfg,
        "config_sha256": ctx.cfg.hash(),
        "seed": ctx.seed,
        "inputs": ctx.inputs,
        "outputs": ctx.outputs,
    });
    runs.insert(command.name(), entry);
    let manifest = serde_json::json!({ "tool": "syntex", "version": VERSION, "runs": runs });
    fs::write(&path, report::pretty(&manifest)).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn train_lm(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: TrainLmConfig = ctx.block(&ctx.cfg.train_lm, "train_lm")?.clone();
    let corpus = ctx.corpus(&c.corpus)?;
    let model = NGramModel::train(&corpus, c.order, c.discount)?;
    ctx.write("model.nglm", &formats::nglm_to_string(&model))
}

fn adapt(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: AdaptConfig = ctx.block(&ctx.cfg.adapt, "adapt")?.clone();
    let model = ctx.nglm(&c.model)?;
    let corpus = ctx.corpus(&c.corpus)?;
    let adapted = model.adapt(&corpus, AdaptationParams { mix_weight: c.mix_weight })?;
    ctx.write("adapted.nglm", &formats::nglm_to_string(&adapted))
}

fn load_instances(ctx: &mut Ctx, path: &Path) -> Result<Vec<PromptInstance>, CliError> {
    let v = ctx.json(path)?;
    serde_json::from_value(v).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn load_templates(ctx: &mut Ctx, path: &Path) -> Result<Vec<PromptTemplate>, CliError> {
    let full = ctx.input(path)?;
    Ok(formats::load_templates(&full)?)
}

fn prompt_list(ctx: &mut Ctx, templates: Option<&Path>, instances: Option<&Path>) -> Result<Vec<Prompt>, CliError> {
    match (templates, instances) {
        (Some(_), Some(_)) => Err(config_err("give either `templates` or `prompts`, not both")),
        (Some(t), None) => {
            let mut out = Vec::new();
            for t in load_templates(ctx, t)? {
                out.extend(t.expand(&ExpandMode::FullCartesian)?.iter().map(PromptInstance::to_prompt));
            }
            Ok(out)
        }
        (None, Some(p)) => Ok(load_instances(ctx, p)?.iter().map(PromptInstance::to_prompt).collect()),
        (None, None) => Ok(vec![Prompt::empty()]),
    }
}

fn tuned_params(ctx: &mut Ctx, path: &Path, base: SamplingParams) -> Result<SamplingParams, CliError> {
    let v = ctx.json(path)?;
    let best: GridConfig = v
        .get("best")
        .cloned()
        .ok_or_else(|| data_err(format!("{}: no `best` entry", path.display())))
        .and_then(|b| serde_json::from_value(b).map_err(data_err))?;
    if let Some(mu) = best.mu() {
        return Err(config_err(format!(
            "tuned configuration has mu={mu}; adapt a model with that weight and generate without `tuned`"
        )));
    }
    Ok(best.sampling_params(&base))
}

fn generate(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: GenerateConfig = ctx.block(&ctx.cfg.generate, "generate")?.clone();
    let prompts = prompt_list(ctx, c.templates.as_deref(), c.prompts.as_deref())?;
    let mut params = c.sampling.params(ctx.seed);
    if let Some(t) = &c.tuned {
        params = tuned_params(ctx, t, params)?;
    }
    params.validate().map_err(config_err)?;
    let policy = ctx.cfg.disclaimer_policy();
    let corpus = match ctx.cfg.backend.kind {
        BackendKind::Local => {
            let path = c.model.as_deref().ok_or_else(|| config_err("local generation needs `generate.model`"))?;
            let model = ctx.nglm(path)?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let backend = LocalBackend::new(Arc::new(model), name);
            parallel::generate_batch(&backend, &prompts, &params, c.count_per_prompt, &policy, &c.corpus_name)?
        }
        BackendKind::Remote => {
            let backend = ctx.remote()?;
            parallel::generate_batch(&backend, &prompts, &params, c.count_per_prompt, &policy, &c.corpus_name)?
        }
    };
    ctx.write_corpus("synthetic.jsonl", &corpus)
}

fn expand_prompts(ctx: &mut Ctx) -> Result<(), CliError> {
    let c = ctx.block(&ctx.cfg.expand_prompts, "expand_prompts")?.clone();
    let mode = match &c.sample {
        Some(s) => ExpandMode::Sampled { n_per_axis: s.n_per_axis, axes: s.axes.clone(), seed: ctx.seed },
        None => ExpandMode::FullCartesian,
    };
    let mut out = Vec::new();
    match c.preset.as_deref() {
        Some("news") => out.extend(si_b_news(ctx.seed)?),
        Some(other) => return Err(config_err(format!("unknown prompt preset {other:?}"))),
        None => {}
    }
    if let Some(t) = &c.templates {
        for t in load_templates(ctx, t)? {
            out.extend(t.expand(&mode)?);
        }
    }
    if out.is_empty() {
        return Err(config_err("expand_prompts needs `templates` or `preset`"));
    }
    ctx.write("prompts.json", &report::pretty(&out))
}

fn axes(spec: &AxesSpec) -> Result<Axes, CliError> {
    match spec {
        AxesSpec::Preset(p) if p == "standard" => Ok(Axes::standard()),
        AxesSpec::Preset(p) => Err(config_err(format!("unknown axes preset {p:?}"))),
        AxesSpec::Explicit(a) => Ok(a.clone()),
    }
}

fn tune(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: TuneBlock = ctx.block(&ctx.cfg.tune, "tune")?.clone();
    let real = ctx.corpus(&c.real)?;
    let prompts = match &c.prompts {
        Some(p) => load_instances(ctx, p)?.iter().map(|i| (i.prompt_id(), i.filled_text.clone())).collect(),
        None => Vec::new(),
    };
    let config = TuneConfig {
        axes: axes(&c.axes)?,
        base_params: c.sampling.params(ctx.seed),
        n_docs: c.n_docs,
        runs: c.runs,
        split: EvalSplit { train_fraction: c.train_fraction, seed: ctx.seed },
        hyper: c.hyper.hyper(),
        master_seed: ctx.seed,
        prompts,
    };
    let report = match ctx.cfg.backend.kind {
        BackendKind::Local => {
            let path = c.model.as_deref().ok_or_else(|| config_err("local tuning needs `tune.model`"))?;
            let model = Arc::new(ctx.nglm(path)?);
            let mut factory = LocalFactory::new(model);
            if let Some(a) = &c.adaptation_corpus {
                let corpus = ctx.corpus(a)?;
                factory = factory.with_adaptation_corpus(&corpus)?;
            }
            parallel::tune(&mut factory, &real, &config)?
        }
        BackendKind::Remote => {
            let mut factory = RemoteFactory { backend: ctx.remote()? };
            parallel::tune(&mut factory, &real, &config)?
        }
    };
    ctx.write("tuning_report.json", &report::tuning_json(&report))?;
    ctx.write("tuning_heatmap.tsv", &report::tuning_heatmap(&report))
}

fn binary_labels(corpus: &Corpus, positive: &str) -> Result<Vec<bool>, CliError> {
    corpus
        .iter()
        .map(|d| {
            d.label
                .as_deref()
                .map(|l| l == positive)
                .ok_or_else(|| data_err(format!("document {:?} has no label", d.id)))
        })
        .collect()
}

fn train_clf(ctx: &mut Ctx) -> Result<(), CliError> {
    let c = ctx.block(&ctx.cfg.train_clf, "train_clf")?.clone();
    let corpus = ctx.corpus(&c.corpus)?;
    let labels = binary_labels(&corpus, &c.positive_label)?;
    let texts: Vec<&str> = corpus.iter().map(|d| d.text.as_str()).collect();
    let split = EvalSplit { train_fraction: c.train_fraction, seed: ctx.seed };
    let r = fit(&texts, &labels, &split, &c.hyper.hyper())?;
    let summary = serde_json::json!({
        "positive_label": c.positive_label,
        "held_out_accuracy": r.held_out_accuracy,
        "held_out_auc": auc(&r.held_out)?,
        "n_train": r.train_indices.len(),
        "n_eval": r.eval_indices.len(),
        "epochs": r.loss_history.len() - 1,
    });
    ctx.write("classifier.linmodel", &formats::linmodel_to_string(&r.model))?;
    ctx.write("train_clf.json", &report::pretty(&summary))
}

fn curve(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: CurveConfig = ctx.block(&ctx.cfg.curve, "curve")?.clone();
    let mut pools = Vec::new();
    for (name, path) in &c.pools {
        pools.push((name.clone(), ctx.corpus(path)?));
    }
    let eval = ctx.corpus(&c.eval)?;
    let spec = CurveSpec {
        train_sizes: c.train_sizes.clone(),
        replicates: c.replicates,
        task: c.task.clone(),
        master_seed: ctx.seed,
        hyper: c.hyper.hyper(),
    };
    let result = parallel::learning_curve(&pools, &eval, &spec)?;
    let crossover = match &c.reference {
        Some(r) => Some(report::Crossover {
            reference_source: r.source.clone(),
            reference_size: r.size,
            sizes: crossover_analysis(&result, &r.source, r.size)?,
        }),
        None => None,
    };
    ctx.write("curve.tsv", &report::curve_tsv(&result))?;
    ctx.write("curve_summary.json", &report::curve_summary(&result, crossover.as_ref()))
}

fn zero_shot(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: ZeroShotConfig = ctx.block(&ctx.cfg.zero_shot, "zero_shot")?.clone();
    let pool = ctx.corpus(&c.pool)?;
    let eval = ctx.corpus(&c.eval)?;
    let (model, r) = zero_shot_train(&pool, &eval, &c.positive_label, &c.hyper.hyper(), ctx.seed)?;
    ctx.write("zero_shot.linmodel", &formats::linmodel_to_string(&model))?;
    ctx.write("zero_shot.json", &report::pretty(&r))
}

fn tag(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: TagConfig = ctx.block(&ctx.cfg.tag, "tag")?.clone();
    let train = ctx.corpus(&c.train)?;
    let input = ctx.corpus(&c.input)?;
    let tagger = PerceptronTagger::train_corpus(&train, c.epochs, ctx.seed)?;
    let mut docs = Vec::with_capacity(input.len());
    let mut pred = Vec::with_capacity(input.len());
    for d in &input {
        let seq = tagger.tag(&tokenize(&d.text));
        let mut doc = d.clone();
        doc.spans = Some(bio_to_spans(seq.tags()));
        docs.push(doc);
        pred.push(seq);
    }
    let tagged = Corpus::new(input.name(), docs)?;
    let scores = if input.iter().all(|d| d.spans.is_some()) {
        let gold: Vec<TaggedSequence> = input.iter().map(TaggedSequence::from_document).collect();
        Some(span_f1(&pred, &gold)?)
    } else {
        None
    };
    let summary = serde_json::json!({
        "documents": tagged.len(),
        "predicted_spans": tagged.iter().map(|d| d.spans.as_ref().map_or(0, Vec::len)).sum::<usize>(),
        "against_input_spans": scores,
    });
    ctx.write_corpus("tagged.jsonl", &tagged)?;
    ctx.write("tag_report.json", &report::pretty(&summary))
}

fn score_spans(ctx: &mut Ctx) -> Result<(), CliError> {
    let c: ScoreSpansConfig = ctx.block(&ctx.cfg.score_spans, "score_spans")?.clone();
    let pred = ctx.corpus(&c.pred)?;
    let gold = ctx.corpus(&c.gold)?;
    if pred.ids() != gold.ids() {
        return Err(data_err("prediction and gold files hold different document ids"));
    }
    let mut p = Vec::with_capacity(gold.len());
    let mut g = Vec::with_capacity(gold.len());
    for d in &gold {
        let pd = pred.get(&d.id).expect("id sets are equal");
        if pd.text != d.text {
            return Err(data_err(format!("document {:?} has different text in the two files", d.id)));
        }
        p.push(TaggedSequence::from_document(pd));
        g.push(TaggedSequence::from_document(d));
    }
    let s = span_f1(&p, &g)?;
    ctx.write("span_scores.json", &report::pretty(&s))
}

fn score_groups_cmd(ctx: &mut Ctx) -> Result<(), CliError> {
    let c = ctx.block(&ctx.cfg.score_groups, "score_groups")?.clone();
    let model_path = ctx.input(&c.model)?;
    let model = formats::load_linmodel(&model_path)?;
    let corpus = ctx.corpus(&c.corpus)?;
    let report = score_groups(&model, &corpus, &c.group_key, c.threshold, c.top_k)?;
    let regression = match &c.labels {
        Some(p) => {
            let v = ctx.json(p)?;
            let labels: BTreeMap<String, bool> = serde_json::from_value(v).map_err(data_err)?;
            Some(group_regression(&report, &labels)?)
        }
        None => None,
    };
    ctx.write("group_scores.tsv", &report::group_tsv(&report))?;
    ctx.write("group_scores.json", &report::group_json(&report, regression.as_ref()))
}

fn bench_config(seed: u64, out_dir: &str) -> RunConfig {
    RunConfig {
        seed: Some(seed),
        out_dir: Some(out_dir.into()),
        disclaimer: Some(DisclaimerConfig {
            template: syntex_core::corpus::DEFAULT_DISCLAIMER_TEMPLATE.into(),
            author: "the syntex benchmark".into(),
            contact: "see README".into(),
            purpose: "exercise the pipeline".into(),
        }),
        ..RunConfig::default()
    }
}

fn sampling(max_tokens: usize) -> SamplingConfig {
    SamplingConfig { max_tokens, ..SamplingConfig::default() }
}

/// Benchmark corpora plus three configs: `tuning.json` (known matched
/// temperature), `pipeline.json` (train-lm through curve on a two-dialect
/// task) and `tagging.json` (tagging curve with a mismatched synthetic pool).
fn bench(ctx: &mut Ctx) -> Result<(), CliError> {
    let b: BenchConfig = ctx.cfg.bench.clone().unwrap_or_default();
    let seed = ctx.seed;
    let policy: DisclaimerPolicy = bench_config(seed, "").disclaimer_policy();

    let t = TuningBenchmark::new(derive_seed(seed, &[1]), b.tuning_real_docs);
    ctx.write("tuning-truth.nglm", &formats::nglm_to_string(&t.truth))?;
    ctx.write_corpus("tuning-real.jsonl", &t.real)?;
    let mut tuning = bench_config(seed, "tuning");
    tuning.tune = Some(TuneBlock {
        model: Some("tuning-truth.nglm".into()),
        real: "tuning-real.jsonl".into(),
        adaptation_corpus: None,
        axes: AxesSpec::Explicit(t.axes.clone()),
        n_docs: (b.tuning_real_docs / 2).max(syntex_core::tuner::MIN_DOCS),
        runs: 10,
        sampling: sampling(t.real_params.max_tokens),
        train_fraction: 0.75,
        hyper: HyperConfig::default(),
        prompts: None,
    });
    ctx.write("tuning.json", &report::pretty(&tuning))?;

    let d = DialectBenchmark::new(derive_seed(seed, &[2]));
    for (name, n, k) in [("dialect-base", 300, 3), ("dialect-adapt", 100, 4), ("dialect-real", 300, 5), ("dialect-eval", 200, 6)] {
        ctx.write_corpus(&format!("{name}.jsonl"), &d.real_corpus(name, n, derive_seed(seed, &[k])))?;
    }
    ctx.write("dialect-templates.json", &report::pretty(&d.templates))?;
    let positive = d.labels[0].clone();
    let mut pipeline = bench_config(seed, "pipeline");
    pipeline.train_lm = Some(TrainLmConfig { corpus: "dialect-base.jsonl".into(), order: 2, discount: 0.1 });
    pipeline.adapt = Some(AdaptConfig {
        model: "pipeline/model.nglm".into(),
        corpus: "dialect-adapt.jsonl".into(),
        mix_weight: 0.5,
    });
    pipeline.tune = Some(TuneBlock {
        model: Some("pipeline/adapted.nglm".into()),
        real: "dialect-real.jsonl".into(),
        adaptation_corpus: None,
        axes: AxesSpec::Explicit(Axes::new().axis(AXIS_TEMPERATURE, [0.5, 1.0, 2.0])),
        n_docs: 60,
        runs: 3,
        sampling: sampling(d.params.max_tokens),
        train_fraction: 0.75,
        hyper: HyperConfig::default(),
        prompts: None,
    });
    pipeline.generate = Some(GenerateConfig {
        model: Some("pipeline/adapted.nglm".into()),
        templates: Some("dialect-templates.json".into()),
        prompts: None,
        tuned: Some("pipeline/tuning_report.json".into()),
        count_per_prompt: 10,
        sampling: sampling(d.params.max_tokens),
        corpus_name: "synthetic".into(),
    });
    pipeline.zero_shot = Some(ZeroShotConfig {
        pool: "pipeline/synthetic.jsonl".into(),
        eval: "dialect-eval.jsonl".into(),
        positive_label: positive.clone(),
        hyper: HyperConfig::default(),
    });
    pipeline.curve = Some(CurveConfig {
        pools: [
            ("real".to_string(), PathBuf::from("dialect-real.jsonl")),
            ("synthetic".to_string(), PathBuf::from("pipeline/synthetic.jsonl")),
        ]
        .into_iter()
        .collect(),
        eval: "dialect-eval.jsonl".into(),
        task: Task::DocClassification { positive_label: positive },
        train_sizes: vec![10, 20, 40, 80],
        replicates: 5,
        reference: Some(ReferenceConfig { source: "real".into(), size: 40 }),
        hyper: HyperConfig::default(),
    });
    ctx.write("pipeline.json", &report::pretty(&pipeline))?;

    let tb = TaggingBenchmark::new(derive_seed(seed, &[3]));
    let (pools, eval) = tb
        .curve_pools(b.tagging_pool_size, b.tagging_eval_size, derive_seed(seed, &[7]))
        .map_err(data_err)?;
    let mut pool_paths = BTreeMap::new();
    for (name, corpus) in &pools {
        let file = format!("tagging-{name}.jsonl");
        let corpus = relabel(corpus, &policy)?;
        ctx.write_corpus(&file, &corpus)?;
        pool_paths.insert(name.clone(), PathBuf::from(file));
    }
    ctx.write_corpus("tagging-eval.jsonl", &eval)?;
    let mut tagging = bench_config(seed, "tagging");
    tagging.curve = Some(CurveConfig {
        pools: pool_paths,
        eval: "tagging-eval.jsonl".into(),
        task: Task::SequenceTagging { epochs: syntex_core::harness::DEFAULT_TAGGER_EPOCHS },
        train_sizes: syntex_core::harness::DEFAULT_TRAIN_SIZES.to_vec(),
        replicates: 5,
        reference: Some(ReferenceConfig { source: POOL_REAL.into(), size: 200 }),
        hyper: HyperConfig::default(),
    });
    tagging.tag = Some(TagConfig {
        train: format!("tagging-{POOL_REAL}.jsonl").into(),
        input: "tagging-eval.jsonl".into(),
        epochs: syntex_core::harness::DEFAULT_TAGGER_EPOCHS,
    });
    tagging.score_spans = Some(ScoreSpansConfig { pred: "tagging/tagged.jsonl".into(), gold: "tagging-eval.jsonl".into() });
    ctx.write("tagging.json", &report::pretty(&tagging))
}

/// Synthetic benchmark documents carry the benchmark's own disclaimer.
fn relabel(corpus: &Corpus, policy: &DisclaimerPolicy) -> Result<Corpus, CliError> {
    let docs = corpus
        .iter()
        .map(|d| if d.is_synthetic() { policy.apply(d.clone()) } else { Ok(d.clone()) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(corpus.name(), docs)?)
}
