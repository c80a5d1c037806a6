//! JSON run configuration shared by every subcommand.
//!
//! Input paths are resolved against the directory holding the config file;
//! outputs go to the output directory. Each subcommand reads its own block.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use syntex_core::corpus::{DisclaimerPolicy, DEFAULT_DISCLAIMER_TEMPLATE};
use syntex_core::harness::{Task, DEFAULT_REPLICATES, DEFAULT_TAGGER_EPOCHS, DEFAULT_TRAIN_SIZES};
use syntex_core::linear::Hyper;
use syntex_core::tuner::Axes;
use syntex_core::SamplingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Local,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(default)]
    pub url: Option<String>,
    /// Model name sent to a remote server.
    #[serde(default = "default_model_name")]
    pub model: String,
    #[serde(default = "default_retries")]
    pub retries: usize,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_model_name() -> String {
    "default".into()
}
fn default_retries() -> usize {
    crate::remote::DEFAULT_RETRIES
}
fn default_backoff_ms() -> u64 {
    crate::remote::DEFAULT_BACKOFF.as_millis() as u64
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Local,
            url: None,
            model: default_model_name(),
            retries: default_retries(),
            backoff_ms: default_backoff_ms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisclaimerConfig {
    #[serde(default = "default_template")]
    pub template: String,
    pub author: String,
    pub contact: String,
    pub purpose: String,
}

fn default_template() -> String {
    DEFAULT_DISCLAIMER_TEMPLATE.into()
}

impl DisclaimerConfig {
    pub fn policy(&self) -> DisclaimerPolicy {
        DisclaimerPolicy {
            template: self.template.clone(),
            author: self.author.clone(),
            contact: self.contact.clone(),
            purpose: self.purpose.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default = "one")]
    pub temperature: f64,
    #[serde(default)]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub top_p: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
}

fn one() -> f64 {
    1.0
}
fn default_max_tokens() -> usize {
    SamplingParams::default().max_tokens
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { temperature: 1.0, top_k: None, top_p: None, max_tokens: default_max_tokens() }
    }
}

impl SamplingConfig {
    pub fn params(&self, seed: u64) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            top_k: self.top_k,
            top_p: self.top_p,
            seed,
            max_tokens: self.max_tokens,
        }
    }
}

/// Overrides on top of [`Hyper::default`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    #[serde(default)]
    pub l2_lambda: Option<f64>,
    #[serde(default)]
    pub max_epochs: Option<usize>,
    #[serde(default)]
    pub ngram_max: Option<usize>,
    #[serde(default)]
    pub min_df: Option<usize>,
}

impl HyperConfig {
    pub fn hyper(&self) -> Hyper {
        let mut h = Hyper::default();
        if let Some(v) = self.l2_lambda {
            h.l2_lambda = v;
        }
        if let Some(v) = self.max_epochs {
            h.max_epochs = v;
        }
        if let Some(v) = self.ngram_max {
            h.features.ngram_max = v;
        }
        if let Some(v) = self.min_df {
            h.features.min_df = v;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainLmConfig {
    pub corpus: PathBuf,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_discount")]
    pub discount: f64,
}

fn default_order() -> usize {
    3
}
fn default_discount() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    pub model: PathBuf,
    pub corpus: PathBuf,
    pub mix_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    /// n-gram model for the local backend.
    #[serde(default)]
    pub model: Option<PathBuf>,
    /// Template file, expanded in full.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    /// Prompt instances written by `expand-prompts`.
    #[serde(default)]
    pub prompts: Option<PathBuf>,
    /// Tuning report whose best configuration overrides `sampling`.
    #[serde(default)]
    pub tuned: Option<PathBuf>,
    #[serde(default = "one_usize")]
    pub count_per_prompt: usize,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default = "default_synthetic_name")]
    pub corpus_name: String,
}

fn one_usize() -> usize {
    1
}
fn default_synthetic_name() -> String {
    "synthetic".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub n_per_axis: usize,
    pub axes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandPromptsConfig {
    #[serde(default)]
    pub templates: Option<PathBuf>,
    /// `"news"` expands the shipped event-news headlines.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub sample: Option<SampleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxesSpec {
    /// `"standard"`: the 56-point grid.
    Preset(String),
    Explicit(Axes),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneBlock {
    #[serde(default)]
    pub model: Option<PathBuf>,
    pub real: PathBuf,
    #[serde(default)]
    pub adaptation_corpus: Option<PathBuf>,
    pub axes: AxesSpec,
    pub n_docs: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub hyper: HyperConfig,
    #[serde(default)]
    pub prompts: Option<PathBuf>,
}

fn default_runs() -> usize {
    10
}
fn default_train_fraction() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainClfConfig {
    pub corpus: PathBuf,
    pub positive_label: String,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub hyper: HyperConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub source: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// Pool name → corpus path. Pools are processed in name order.
    pub pools: BTreeMap<String, PathBuf>,
    pub eval: PathBuf,
    pub task: Task,
    #[serde(default = "default_sizes")]
    pub train_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    #[serde(default)]
    pub hyper: HyperConfig,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_TRAIN_SIZES.to_vec()
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroShotConfig {
    pub pool: PathBuf,
    pub eval: PathBuf,
    pub positive_label: String,
    #[serde(default)]
    pub hyper: HyperConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    pub train: PathBuf,
    pub input: PathBuf,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_epochs() -> usize {
    DEFAULT_TAGGER_EPOCHS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSpansConfig {
    pub pred: PathBuf,
    pub gold: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreGroupsConfig {
    /// A `LINMODEL v1` file.
    pub model: PathBuf,
    pub corpus: PathBuf,
    pub group_key: String,
    #[serde(default = "half")]
    pub threshold: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// JSON object mapping group → binary outcome, for the group regression.
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

fn half() -> f64 {
    0.5
}
fn default_top_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_bench_real")]
    pub tuning_real_docs: usize,
    #[serde(default = "default_bench_pool")]
    pub tagging_pool_size: usize,
    #[serde(default = "default_bench_eval")]
    pub tagging_eval_size: usize,
}

fn default_bench_real() -> usize {
    400
}
fn default_bench_pool() -> usize {
    500
}
fn default_bench_eval() -> usize {
    300
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            tuning_real_docs: default_bench_real(),
            tagging_pool_size: default_bench_pool(),
            tagging_eval_size: default_bench_eval(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub disclaimer: Option<DisclaimerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_lm: Option<TrainLmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapt: Option<AdaptConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand_prompts: Option<ExpandPromptsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_clf: Option<TrainClfConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_shot: Option<ZeroShotConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<TagConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_spans: Option<ScoreSpansConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_groups: Option<ScoreGroupsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn disclaimer_policy(&self) -> DisclaimerPolicy {
        self.disclaimer.as_ref().map(DisclaimerConfig::policy).unwrap_or_default()
    }

    /// SHA-256 of the canonical JSON of everything except the output
    /// directory, so the same run in another directory hashes the same.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let v = serde_json::to_value(&c).expect("config serializes");
        hex::encode(Sha256::digest(serde_json::to_string(&v).expect("value serializes")))
    }
}

pub fn file_sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `path` relative to `base` unless absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
