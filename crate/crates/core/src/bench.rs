//! Small ground-truth tasks whose answers are known by construction.
//!
//! * [`TuningBenchmark`]: real text sampled at T=1 from a known bigram
//!   model; the matched decoding configuration should be indistinguishable
//!   from it, extreme temperatures should not.
//! * [`DialectBenchmark`]: two prompt families that steer one model into
//!   disjoint vocabularies, for zero-shot and classification curves.
//! * [`TaggingBenchmark`]: sentences mentioning weapons from a Zipf-distributed
//!   lexicon, with gold spans from the lexicon, for tagging curves.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::corpus::{Corpus, CorpusError, DisclaimerPolicy, Document, Span};
use crate::generator::{generate_batch, Backend, GenerateError, LocalBackend, Prompt};
use crate::ngram::{NGramModel, BOS, EOS};
use crate::prompt::{ExpandMode, PromptTemplate};
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};
use crate::sampling::SamplingParams;
use crate::tokenize::tokenize;
use crate::tuner::{Axes, GridConfig, AXIS_TEMPERATURE};

use rand::Rng;

pub const WEAPON_TAG: &str = "WEAPON";

type Entry = (Vec<String>, String, f64);

fn entry(ctx: &str, tok: &str, count: f64) -> Entry {
    (alloc::vec![ctx.to_string()], tok.to_string(), count)
}

/// Samples `n` continuations of `prompt` from `model`, one seed per document.
pub fn sample_texts(model: &Arc<NGramModel>, prompt: &str, n: usize, base: &SamplingParams, seed: u64) -> Vec<String> {
    let backend = LocalBackend::new(model.clone(), "bench");
    (0..n)
        .map(|i| {
            let params = SamplingParams { seed: derive_seed(seed, &[i as u64]), ..base.clone() };
            backend.complete(prompt, &params).expect("local backend never fails")
        })
        .collect()
}

fn real_corpus(name: &str, prefix: &str, texts: Vec<String>) -> Corpus {
    let docs = texts.into_iter().enumerate().map(|(i, t)| Document::real(format!("{prefix}-{i}"), t)).collect();
    Corpus::new(name, docs).expect("generated ids are unique")
}

/// Bigram model where every word has a few strongly preferred successors.
fn peaked_bigram(words: &[String], rng: &mut ChaCha8Rng, favored: usize, eos: f64) -> NGramModel {
    let mut e = Vec::new();
    for w in words {
        e.push(entry(BOS, w, 1.0 + rng.random_range(0.0..4.0)));
    }
    for w in words {
        for v in words {
            e.push(entry(w, v, 0.05));
        }
        for _ in 0..favored {
            let v = &words[rng.random_range(0..words.len())];
            e.push(entry(w, v, 4.0 + rng.random_range(0.0..8.0)));
        }
        e.push(entry(w, EOS, eos));
    }
    NGramModel::from_counts(2, 0.0, e).expect("valid counts")
}

#[derive(Debug, Clone)]
pub struct TuningBenchmark {
    pub truth: Arc<NGramModel>,
    pub real: Corpus,
    /// Decoding parameters the real text was drawn with.
    pub real_params: SamplingParams,
    pub axes: Axes,
    pub matched: GridConfig,
}

pub const TUNING_VOCAB: usize = 40;
pub const TUNING_TEMPERATURES: [f64; 3] = [0.1, 1.0, 10.0];

impl TuningBenchmark {
    pub fn new(seed: u64, n_real: usize) -> Self {
        let mut rng = rng_from_seed(derive_seed(seed, &[0]));
        let words: Vec<String> = (0..TUNING_VOCAB).map(|i| format!("w{i:02}")).collect();
        let truth = Arc::new(peaked_bigram(&words, &mut rng, 3, 3.0));
        let real_params = SamplingParams { max_tokens: 40, ..SamplingParams::default() };
        let texts = sample_texts(&truth, "", n_real, &real_params, derive_seed(seed, &[1]));
        Self {
            truth,
            real: real_corpus("real", "real", texts),
            real_params,
            axes: Axes::new().axis(AXIS_TEMPERATURE, TUNING_TEMPERATURES),
            matched: GridConfig(alloc::vec![(AXIS_TEMPERATURE.to_string(), 1.0)]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DialectBenchmark {
    pub model: Arc<NGramModel>,
    pub templates: Vec<PromptTemplate>,
    pub labels: [String; 2],
    pub params: SamplingParams,
}

pub const DIALECT_WORDS: usize = 30;

impl DialectBenchmark {
    /// One bigram model with two nearly closed vocabularies; each template
    /// family opens with words of one of them.
    pub fn new(seed: u64) -> Self {
        let mut rng = rng_from_seed(derive_seed(seed, &[10]));
        let labels = [String::from("alpha"), String::from("beta")];
        let vocab: [Vec<String>; 2] = [
            (0..DIALECT_WORDS).map(|i| format!("a{i:02}")).collect(),
            (0..DIALECT_WORDS).map(|i| format!("b{i:02}")).collect(),
        ];
        let mut e = Vec::new();
        for (side, words) in vocab.iter().enumerate() {
            let other = &vocab[1 - side];
            for w in words {
                e.push(entry(BOS, w, 1.0));
                for v in words {
                    e.push(entry(w, v, 0.5 + rng.random_range(0.0..2.0)));
                }
                for v in other.iter().take(3) {
                    e.push(entry(w, v, 0.05));
                }
                e.push(entry(w, EOS, 3.0));
            }
        }
        let model = Arc::new(NGramModel::from_counts(2, 0.0, e).expect("valid counts"));
        let templates = vocab
            .iter()
            .zip(&labels)
            .map(|(words, label)| {
                PromptTemplate::new(format!("dialect-{label}"), "{opener}")
                    .with_label(label.clone())
                    .with_domain("opener", words.iter().take(10).cloned())
            })
            .collect();
        Self { model, templates, labels, params: SamplingParams { max_tokens: 30, ..Default::default() } }
    }

    pub fn prompts(&self) -> Vec<Prompt> {
        self.templates
            .iter()
            .flat_map(|t| t.expand(&ExpandMode::FullCartesian).expect("templates are well formed"))
            .map(|i| i.to_prompt())
            .collect()
    }

    /// Labeled real-provenance documents, alternating between the families.
    /// Text is the prompt followed by its continuation.
    pub fn real_corpus(&self, name: &str, n: usize, seed: u64) -> Corpus {
        let prompts = self.prompts();
        let backend = LocalBackend::new(self.model.clone(), "bench");
        let docs = (0..n)
            .map(|i| {
                let p = &prompts[(i * 7 + i / prompts.len()) % prompts.len()];
                let params = SamplingParams { seed: derive_seed(seed, &[i as u64]), ..self.params.clone() };
                let cont = backend.complete(&p.text, &params).expect("local backend never fails");
                let text = if cont.is_empty() { p.text.clone() } else { format!("{} {cont}", p.text) };
                Document::real(format!("{name}-{i}"), text).with_label(p.label.clone().unwrap_or_default())
            })
            .collect();
        Corpus::new(name, docs).expect("generated ids are unique")
    }

    /// Prompt-labeled synthetic documents, `per_prompt` for each prompt.
    pub fn synthetic_pool(&self, name: &str, per_prompt: usize, seed: u64) -> Result<Corpus, GenerateError> {
        let backend = LocalBackend::new(self.model.clone(), "dialect");
        let params = SamplingParams { seed, ..self.params.clone() };
        generate_batch(&backend, &self.prompts(), &params, per_prompt, &DisclaimerPolicy::default(), name)
    }
}

#[derive(Debug, Clone)]
pub struct TaggingBenchmark {
    pub model: Arc<NGramModel>,
    pub lexicon: BTreeSet<String>,
}

pub const WEAPON_TYPES: usize = 400;
pub const WEAPON_ZIPF_EXPONENT: f64 = 1.0;
// successor mass of weapons after a cue word, and after any other word
const CUE_MASS: f64 = 10.0;
const BARE_MASS: f64 = 1.0;
const TAG_GENERIC: usize = 60;
const TAG_CUES: [&str; 4] = ["with", "carrying", "fired", "seized"];

/// Normalized Zipf weight of the weapon at rank `r`.
fn zipf(r: usize) -> f64 {
    let z: f64 = (1..=WEAPON_TYPES).map(|k| libm::pow(k as f64, -WEAPON_ZIPF_EXPONENT)).sum();
    libm::pow((r + 1) as f64, -WEAPON_ZIPF_EXPONENT) / z
}

impl TaggingBenchmark {
    /// Generic words, a few cue words that usually precede a weapon, and a
    /// Zipf-weighted weapon lexicon. A weapon mention is any lexicon token.
    pub fn new(seed: u64) -> Self {
        let mut rng = rng_from_seed(derive_seed(seed, &[20]));
        let generic: Vec<String> = (0..TAG_GENERIC).map(|i| format!("g{i:02}")).collect();
        let weapons: Vec<String> = (0..WEAPON_TYPES).map(|i| format!("arm{i:03}")).collect();
        let mut e = Vec::new();
        for g in &generic {
            e.push(entry(BOS, g, 1.0));
            for _ in 0..4 {
                e.push(entry(g, &generic[rng.random_range(0..TAG_GENERIC)], 3.0));
            }
            for h in &generic {
                e.push(entry(g, h, 0.1));
            }
            for c in TAG_CUES {
                e.push(entry(g, c, 0.4));
            }
            // occasional bare mention without a cue
            for (r, w) in weapons.iter().enumerate() {
                e.push(entry(g, w, BARE_MASS * zipf(r)));
            }
            e.push(entry(g, EOS, 1.2));
        }
        for c in TAG_CUES {
            for (r, w) in weapons.iter().enumerate() {
                e.push(entry(c, w, CUE_MASS * zipf(r)));
            }
            for g in generic.iter().take(20) {
                e.push(entry(c, g, 0.5));
            }
        }
        for w in &weapons {
            for g in generic.iter().step_by(3) {
                e.push(entry(w, g, 1.0));
            }
            e.push(entry(w, EOS, 2.0));
        }
        let model = Arc::new(NGramModel::from_counts(2, 0.0, e).expect("valid counts"));
        Self { model, lexicon: weapons.into_iter().collect() }
    }

    pub fn spans(&self, text: &str) -> Vec<Span> {
        tokenize(text)
            .iter()
            .enumerate()
            .filter(|(_, t)| self.lexicon.contains(*t))
            .map(|(i, _)| Span::new(i, i + 1, WEAPON_TAG))
            .collect()
    }

    /// Texts sampled with `params`; gold spans come from the lexicon.
    /// Synthetic corpora carry the default disclaimer.
    pub fn corpus(&self, name: &str, n: usize, params: &SamplingParams, seed: u64, synthetic: bool) -> Result<Corpus, CorpusError> {
        let texts = sample_texts(&self.model, "", n, params, seed);
        let policy = DisclaimerPolicy::default();
        let docs = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let spans = self.spans(&t);
                let id = format!("{name}-{i}");
                if synthetic {
                    policy.apply(Document::synthetic_draft(id, t).with_spans(spans))
                } else {
                    Ok(Document::real(id, t).with_spans(spans))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Corpus::new(name, docs)
    }

    /// Real, matched-synthetic and mismatched-synthetic training pools of
    /// `pool_size` documents each, plus a real evaluation corpus.
    pub fn curve_pools(&self, pool_size: usize, eval_size: usize, seed: u64) -> Result<(Vec<(String, Corpus)>, Corpus), CorpusError> {
        let p = self.params();
        let off = SamplingParams { temperature: MISMATCHED_TEMPERATURE, ..p.clone() };
        let pools = alloc::vec![
            (String::from(POOL_REAL), self.corpus(POOL_REAL, pool_size, &p, derive_seed(seed, &[1]), false)?),
            (String::from(POOL_MATCHED), self.corpus(POOL_MATCHED, pool_size, &p, derive_seed(seed, &[2]), true)?),
            (String::from(POOL_MISMATCHED), self.corpus(POOL_MISMATCHED, pool_size, &off, derive_seed(seed, &[3]), true)?),
        ];
        let eval = self.corpus("eval", eval_size, &p, derive_seed(seed, &[4]), false)?;
        Ok((pools, eval))
    }

    /// Decoding parameters of the real text.
    pub fn params(&self) -> SamplingParams {
        SamplingParams { max_tokens: 40, ..Default::default() }
    }
}

pub const POOL_REAL: &str = "real";
pub const POOL_MATCHED: &str = "synthetic-matched";
pub const POOL_MISMATCHED: &str = "synthetic-mismatched";
/// Temperature of the deliberately mismatched synthetic pool; the real text uses 1.
pub const MISMATCHED_TEMPERATURE: f64 = 0.8;
