//! Order-k language model with absolute-discounting backoff.
//!
//! Counts are kept for every context length `0..order`. For a context `c`
//! seen in training with total count `N(c)`,
//!
//! ```text
//! p(w | c) = max(N(c, w) - D, 0) / N(c) + γ(c) · p(w | c')
//! γ(c)     = Σ_w min(N(c, w), D) / N(c)
//! ```
//!
//! where `c'` drops the oldest token of `c`. Unseen contexts back off
//! directly to `c'`, and below the empty context sits a uniform floor over
//! the vocabulary (excluding BOS). With `D = 0` this is the plain empirical
//! frequency `N(c, w) / N(c)`.
//!
//! Each document is one sequence, padded with `order - 1` BOS tokens and
//! terminated by EOS. Counts are reals because adaptation mixes them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::Corpus;
use crate::dist::{Distribution, NORMALIZATION_TOLERANCE};
use crate::tokenize::tokenize;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("order must be >= 1")]
    InvalidOrder,
    #[error("discount must lie in [0, 1), got {0}")]
    InvalidDiscount(f64),
    #[error("mix weight must lie in [0, 1], got {0}")]
    InvalidMixWeight(f64),
    #[error("order mismatch: base model has order {base}, requested {requested}")]
    OrderMismatch { base: usize, requested: usize },
    #[error("zero probability for token {0:?}")]
    ZeroProbability(String),
    #[error("invalid count entry: {0}")]
    InvalidEntry(String),
    #[error("context {context:?} is not normalized (sum {sum})")]
    Denormalized { context: Vec<String>, sum: f64 },
}

/// Index into a model's vocabulary. Ids follow lexicographic token order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

impl TokenId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Sorted token list, always containing BOS, EOS and UNK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
}

impl Vocab {
    fn new(tokens: BTreeSet<String>) -> Self {
        let mut tokens = tokens;
        for r in [BOS, EOS, UNK] {
            tokens.insert(r.to_string());
        }
        Self { tokens: tokens.into_iter().collect() }
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.tokens
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
            .map(|i| TokenId(i as u32))
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id.idx()]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Weight on the adaptation corpus when mixing counts with a base model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationParams {
    pub mix_weight: f64,
}

/// Raw counts per context length: `levels[j][context][token]`.
pub type CountTable = Vec<BTreeMap<Vec<String>, BTreeMap<String, f64>>>;

#[derive(Debug, Clone, PartialEq)]
struct ContextStats {
    total: f64,
    backoff: f64,
    next: Vec<(TokenId, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    vocab: Vocab,
    bos: TokenId,
    eos: TokenId,
    unk: TokenId,
    raw: CountTable,
    levels: Vec<BTreeMap<Vec<TokenId>, ContextStats>>,
}

fn check_params(order: usize, discount: f64) -> Result<(), LmError> {
    if order == 0 {
        return Err(LmError::InvalidOrder);
    }
    if !(discount.is_finite() && (0.0..1.0).contains(&discount)) {
        return Err(LmError::InvalidDiscount(discount));
    }
    Ok(())
}

/// Accumulates counts of every (context, token) pair for context lengths `0..order`.
pub fn count_sequences<'a, I>(order: usize, sequences: I) -> CountTable
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut table: CountTable = vec![BTreeMap::new(); order];
    let bos = BOS.to_string();
    let eos = EOS.to_string();
    for seq in sequences {
        let mut padded: Vec<&String> = Vec::with_capacity(seq.len() + order);
        padded.extend(core::iter::repeat(&bos).take(order - 1));
        padded.extend(seq.iter());
        padded.push(&eos);
        for i in (order - 1)..padded.len() {
            let token = padded[i];
            for (j, level) in table.iter_mut().enumerate() {
                let ctx: Vec<String> = padded[i - j..i].iter().map(|s| (*s).clone()).collect();
                *level.entry(ctx).or_default().entry(token.clone()).or_insert(0.0) += 1.0;
            }
        }
    }
    table
}

impl NGramModel {
    pub fn train(corpus: &Corpus, order: usize, discount: f64) -> Result<Self, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let seqs: Vec<Vec<String>> = corpus.iter().map(|d| tokenize(&d.text)).collect();
        Self::train_sequences(seqs.iter().map(|s| s.as_slice()), order, discount)
    }

    pub fn train_sequences<'a, I>(sequences: I, order: usize, discount: f64) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        check_params(order, discount)?;
        let mut iter = sequences.into_iter().peekable();
        if iter.peek().is_none() {
            return Err(LmError::EmptyCorpus);
        }
        Self::from_table(order, discount, count_sequences(order, iter))
    }

    /// Builds a model from explicit `(context, token, count)` entries.
    pub fn from_counts<I>(order: usize, discount: f64, entries: I) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = (Vec<String>, String, f64)>,
    {
        check_params(order, discount)?;
        let mut table: CountTable = vec![BTreeMap::new(); order];
        for (ctx, tok, count) in entries {
            if ctx.len() >= order {
                return Err(LmError::InvalidEntry(alloc::format!("context {ctx:?} too long for order {order}")));
            }
            if !(count.is_finite() && count >= 0.0) {
                return Err(LmError::InvalidEntry(alloc::format!("count {count} for {tok:?}")));
            }
            if tok == BOS {
                return Err(LmError::InvalidEntry("BOS cannot be predicted".to_string()));
            }
            if ctx.iter().any(|t| t == EOS) {
                return Err(LmError::InvalidEntry("EOS cannot appear in a context".to_string()));
            }
            let slot = table[ctx.len()].entry(ctx).or_default().entry(tok).or_insert(0.0);
            *slot += count;
        }
        Self::from_table(order, discount, table)
    }

    fn from_table(order: usize, discount: f64, mut raw: CountTable) -> Result<Self, LmError> {
        check_params(order, discount)?;
        raw.resize(order, BTreeMap::new());
        for level in raw.iter_mut() {
            for next in level.values_mut() {
                next.retain(|_, c| *c > 0.0);
            }
            level.retain(|_, next| !next.is_empty());
        }
        let mut tokens = BTreeSet::new();
        for level in &raw {
            for (ctx, next) in level {
                tokens.extend(ctx.iter().cloned());
                tokens.extend(next.keys().cloned());
            }
        }
        let vocab = Vocab::new(tokens);
        let id = |t: &str| vocab.id(t).expect("token in vocab");
        let mut levels = Vec::with_capacity(order);
        for level in &raw {
            let mut compiled = BTreeMap::new();
            for (ctx, next) in level {
                let key: Vec<TokenId> = ctx.iter().map(|t| id(t)).collect();
                let next: Vec<(TokenId, f64)> = next.iter().map(|(t, c)| (id(t), *c)).collect();
                let total: f64 = next.iter().map(|e| e.1).sum();
                let backoff: f64 = next.iter().map(|e| e.1.min(discount)).sum();
                compiled.insert(key, ContextStats { total, backoff, next });
            }
            levels.push(compiled);
        }
        Ok(Self {
            order,
            discount,
            bos: id(BOS),
            eos: id(EOS),
            unk: id(UNK),
            vocab,
            raw,
            levels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn bos(&self) -> TokenId {
        self.bos
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn unk(&self) -> TokenId {
        self.unk
    }

    pub fn counts(&self) -> &CountTable {
        &self.raw
    }

    /// Every stored `(context, token, count)` triple, shortest contexts first.
    pub fn entries(&self) -> impl Iterator<Item = (&[String], &str, f64)> + '_ {
        self.raw.iter().flat_map(|level| {
            level
                .iter()
                .flat_map(|(ctx, next)| next.iter().map(move |(t, c)| (ctx.as_slice(), t.as_str(), *c)))
        })
    }

    /// Maps a context to ids: BOS padding in front, UNK for unknown tokens,
    /// truncated to the last `order - 1` positions.
    pub fn encode_context<S: AsRef<str>>(&self, context: &[S]) -> Vec<TokenId> {
        let keep = self.order - 1;
        let mut ids = vec![self.bos; keep];
        ids.extend(context.iter().map(|t| self.vocab.id(t.as_ref()).unwrap_or(self.unk)));
        ids.split_off(ids.len() - keep)
    }

    /// Dense next-token probabilities indexed by [`TokenId`]; BOS gets 0.
    /// `context` must already be encoded (exactly `order - 1` ids).
    pub fn dense_probs(&self, context: &[TokenId]) -> Vec<f64> {
        debug_assert_eq!(context.len(), self.order - 1);
        let v = self.vocab.len();
        let mut out = vec![1.0 / (v - 1) as f64; v];
        out[self.bos.idx()] = 0.0;
        for j in 0..self.order {
            let ctx = &context[context.len() - j..];
            let Some(stats) = self.levels[j].get(ctx) else { continue };
            if self.discount == 0.0 {
                out.iter_mut().for_each(|p| *p = 0.0);
                for &(w, n) in &stats.next {
                    out[w.idx()] = n / stats.total;
                }
            } else {
                let gamma = stats.backoff / stats.total;
                out.iter_mut().for_each(|p| *p *= gamma);
                for &(w, n) in &stats.next {
                    out[w.idx()] += (n - self.discount).max(0.0) / stats.total;
                }
            }
        }
        out
    }

    /// Next-token distribution over ids with positive probability.
    pub fn distribution_ids(&self, context: &[TokenId]) -> Distribution<TokenId> {
        let probs = self.dense_probs(context);
        let entries = probs
            .into_iter()
            .enumerate()
            .filter(|e| e.1 > 0.0)
            .map(|(i, p)| (TokenId(i as u32), p))
            .collect();
        Distribution::from_sorted_unchecked(entries)
    }

    /// Next-token distribution given the preceding tokens. Only the last
    /// `order - 1` tokens matter.
    pub fn next_token_distribution<S: AsRef<str>>(&self, context: &[S]) -> Distribution<String> {
        let ids = self.encode_context(context);
        self.distribution_ids(&ids).map_keys(|id| self.vocab.token(id).to_string())
    }

    pub fn prob<S: AsRef<str>>(&self, context: &[S], token: &str) -> f64 {
        let ids = self.encode_context(context);
        let w = self.vocab.id(token).unwrap_or(self.unk);
        self.dense_probs(&ids)[w.idx()]
    }

    /// `exp` of the mean negative log-probability per token, EOS included.
    pub fn perplexity(&self, corpus: &Corpus) -> Result<f64, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let seqs: Vec<Vec<String>> = corpus.iter().map(|d| tokenize(&d.text)).collect();
        self.perplexity_sequences(seqs.iter().map(|s| s.as_slice()))
    }

    pub fn perplexity_sequences<'a, I>(&self, sequences: I) -> Result<f64, LmError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut nll = 0.0;
        let mut n = 0usize;
        for seq in sequences {
            let mut ctx = vec![self.bos; self.order - 1];
            let targets = seq
                .iter()
                .map(|t| self.vocab.id(t).unwrap_or(self.unk))
                .chain(core::iter::once(self.eos));
            for w in targets {
                let p = self.dense_probs(&ctx[ctx.len() - (self.order - 1)..])[w.idx()];
                if p <= 0.0 {
                    return Err(LmError::ZeroProbability(self.vocab.token(w).to_string()));
                }
                nll -= libm::log(p);
                n += 1;
                ctx.push(w);
            }
        }
        if n == 0 {
            return Err(LmError::EmptyCorpus);
        }
        Ok(libm::exp(nll / n as f64))
    }

    /// Count-mixing adaptation: both count tables are rescaled to a common
    /// total mass `M = (1-μ)·M_base + μ·M_adapt`, then mixed with weights
    /// `1-μ` and `μ`. Tokens whose mixed count is zero leave the vocabulary,
    /// so `μ = 0` reproduces the base model and `μ = 1` a model trained on the
    /// adaptation corpus alone.
    pub fn adapt(&self, adaptation: &Corpus, params: AdaptationParams) -> Result<Self, LmError> {
        let mu = params.mix_weight;
        if !(mu.is_finite() && (0.0..=1.0).contains(&mu)) {
            return Err(LmError::InvalidMixWeight(mu));
        }
        if adaptation.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let seqs: Vec<Vec<String>> = adaptation.iter().map(|d| tokenize(&d.text)).collect();
        let other = count_sequences(self.order, seqs.iter().map(|s| s.as_slice()));
        self.mix_with(&other, mu)
    }

    /// Adapts towards another model of the same order.
    pub fn adapt_to_model(&self, other: &NGramModel, params: AdaptationParams) -> Result<Self, LmError> {
        if other.order != self.order {
            return Err(LmError::OrderMismatch { base: self.order, requested: other.order });
        }
        let mu = params.mix_weight;
        if !(mu.is_finite() && (0.0..=1.0).contains(&mu)) {
            return Err(LmError::InvalidMixWeight(mu));
        }
        self.mix_with(&other.raw, mu)
    }

    fn mix_with(&self, other: &CountTable, mu: f64) -> Result<Self, LmError> {
        // Trained tables hold the same mass at every level; hand-built ones may leave some empty.
        let mass = |t: &CountTable| -> f64 {
            t.iter().map(|l| l.values().flat_map(|m| m.values()).sum::<f64>()).fold(0.0, f64::max)
        };
        let base_mass = mass(&self.raw);
        let other_mass = mass(other);
        if other_mass <= 0.0 {
            return Err(LmError::EmptyCorpus);
        }
        let target = (1.0 - mu) * base_mass + mu * other_mass;
        let wb = (1.0 - mu) * (target / base_mass);
        let wo = mu * (target / other_mass);
        let mut table: CountTable = vec![BTreeMap::new(); self.order];
        for (src, w) in [(&self.raw, wb), (other, wo)] {
            if w == 0.0 {
                continue;
            }
            for (j, level) in src.iter().enumerate() {
                for (ctx, next) in level {
                    let slot = table[j].entry(ctx.clone()).or_default();
                    for (t, c) in next {
                        *slot.entry(t.clone()).or_insert(0.0) += w * c;
                    }
                }
            }
        }
        Self::from_table(self.order, self.discount, table)
    }

    /// Checks that every stored context yields a distribution summing to one.
    pub fn validate_normalization(&self) -> Result<(), LmError> {
        for level in &self.levels {
            for ctx in level.keys() {
                let mut padded = vec![self.bos; self.order - 1 - ctx.len()];
                padded.extend_from_slice(ctx);
                let sum: f64 = self.dense_probs(&padded).iter().sum();
                if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                    return Err(LmError::Denormalized {
                        context: ctx.iter().map(|t| self.vocab.token(*t).to_string()).collect(),
                        sum,
                    });
                }
            }
        }
        Ok(())
    }
}
