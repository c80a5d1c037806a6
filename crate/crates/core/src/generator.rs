//! Document generation from a backend under sampling parameters.
//!
//! A [`Backend`] turns a prompt and [`SamplingParams`] into a continuation.
//! [`LocalBackend`] samples from an [`NGramModel`]; the HTTP backend lives in
//! the `syntex` crate. Both go through [`generate`], which returns a
//! disclaimed synthetic [`Document`] holding the continuation only.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, DisclaimerPolicy, Document};
use crate::ngram::NGramModel;
use crate::rng::{derive_seed, hash_str, rng_from_seed};
use crate::sampling::{sample_next, ParamError, SamplingParams};
use crate::tokenize::{detokenize, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("count_per_prompt must be >= 1")]
    InvalidCount,
}

pub trait Backend {
    /// Stable identifier recorded in document metadata.
    fn id(&self) -> String;

    /// Continuation of `prompt`, without the prompt itself.
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn id(&self) -> String {
        (**self).id()
    }
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

/// Samples from an n-gram model, applying the sampling parameters locally.
#[derive(Debug, Clone)]
pub struct LocalBackend {
    model: Arc<NGramModel>,
    name: String,
}

impl LocalBackend {
    pub fn new(model: Arc<NGramModel>, name: impl Into<String>) -> Self {
        Self { model, name: name.into() }
    }

    pub fn model(&self) -> &NGramModel {
        &self.model
    }

    /// Token-level generation: stops at EOS or after `max_tokens` tokens.
    pub fn continue_tokens(&self, prompt: &[String], params: &SamplingParams) -> Vec<String> {
        let model = &*self.model;
        let keep = model.order() - 1;
        let mut ctx = model.encode_context(prompt);
        let mut rng = rng_from_seed(params.seed);
        let mut out = Vec::new();
        while out.len() < params.max_tokens {
            let dist = model.distribution_ids(&ctx[ctx.len() - keep..]);
            let Some(next) = sample_next(&dist, params, &mut rng) else { break };
            if next == model.eos() {
                break;
            }
            out.push(model.vocab().token(next).to_string());
            ctx.push(next);
        }
        out
    }
}

impl Backend for LocalBackend {
    fn id(&self) -> String {
        format!("local:{}", self.name)
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        Ok(detokenize(&self.continue_tokens(&tokenize(prompt), params)))
    }
}

/// A concrete prompt: identifier, text, and the label it is meant to elicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

impl Prompt {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into(), label: None }
    }

    /// Unconditional generation.
    pub fn empty() -> Self {
        Self::new("none", "")
    }
}

fn fmt_opt<T: core::fmt::Display>(v: Option<T>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "none".to_string(),
    }
}

/// Metadata entries recording the sampling parameters.
pub fn params_meta(params: &SamplingParams) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("seed".to_string(), params.seed.to_string());
    m.insert("temperature".to_string(), params.temperature.to_string());
    m.insert("top_k".to_string(), fmt_opt(params.top_k));
    m.insert("top_p".to_string(), fmt_opt(params.top_p));
    m.insert("max_tokens".to_string(), params.max_tokens.to_string());
    m
}

pub fn generate_with_id<B: Backend + ?Sized>(
    backend: &B,
    doc_id: String,
    prompt: &Prompt,
    params: &SamplingParams,
    policy: &DisclaimerPolicy,
) -> Result<Document, GenerateError> {
    params.validate()?;
    let text = backend.complete(&prompt.text, params)?;
    let mut doc = Document::synthetic_draft(doc_id, text);
    doc.meta = params_meta(params);
    doc.meta.insert("backend".to_string(), backend.id());
    doc.meta.insert("prompt_id".to_string(), prompt.id.clone());
    if let Some(label) = &prompt.label {
        doc.label = Some(label.clone());
        doc.meta.insert("label_source".to_string(), "prompt".to_string());
    }
    let doc = policy.apply(doc)?;
    doc.validate()?;
    Ok(doc)
}

/// One synthetic document, with id `<prompt id>@<seed>`.
pub fn generate<B: Backend + ?Sized>(
    backend: &B,
    prompt: &Prompt,
    params: &SamplingParams,
    policy: &DisclaimerPolicy,
) -> Result<Document, GenerateError> {
    generate_with_id(backend, format!("{}@{}", prompt.id, params.seed), prompt, params, policy)
}

/// One cell of a batch: the prompt position, the replica, and its seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchJob {
    pub position: usize,
    pub replica: usize,
    pub seed: u64,
}

/// Jobs of [`generate_batch`] in output order. The seed of each job is
/// `seed_base XOR h(prompt id, position, replica)`, so duplicate prompts
/// still get distinct documents.
pub fn batch_jobs(
    prompts: &[Prompt],
    seed_base: u64,
    count_per_prompt: usize,
) -> Result<Vec<BatchJob>, GenerateError> {
    if count_per_prompt == 0 {
        return Err(GenerateError::InvalidCount);
    }
    let mut jobs = Vec::with_capacity(prompts.len() * count_per_prompt);
    for (position, p) in prompts.iter().enumerate() {
        for replica in 0..count_per_prompt {
            let h = derive_seed(hash_str(&p.id), &[position as u64, replica as u64]);
            jobs.push(BatchJob { position, replica, seed: seed_base ^ h });
        }
    }
    Ok(jobs)
}

pub fn run_job<B: Backend + ?Sized>(
    backend: &B,
    prompts: &[Prompt],
    job: BatchJob,
    params: &SamplingParams,
    policy: &DisclaimerPolicy,
) -> Result<Document, GenerateError> {
    let prompt = &prompts[job.position];
    let id = format!("{}#{}.{}", prompt.id, job.position, job.replica);
    let params = SamplingParams { seed: job.seed, ..params.clone() };
    generate_with_id(backend, id, prompt, &params, policy)
}

/// `count_per_prompt` documents per prompt, in prompt-then-replica order.
/// Any backend failure discards the whole batch.
pub fn generate_batch<B: Backend + ?Sized>(
    backend: &B,
    prompts: &[Prompt],
    params: &SamplingParams,
    count_per_prompt: usize,
    policy: &DisclaimerPolicy,
    corpus_name: &str,
) -> Result<Corpus, GenerateError> {
    let docs = batch_jobs(prompts, params.seed, count_per_prompt)?
        .into_iter()
        .map(|job| run_job(backend, prompts, job, params, policy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(corpus_name, docs)?)
}
