//! Decoding transforms and seeded categorical sampling.
//!
//! The transforms always run in the order temperature → top-k → top-p,
//! followed by one categorical draw. Ties are broken by key order.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::Distribution;
use crate::rng::{unit_f64, ChaCha8Rng};

/// Cumulative-mass slack when locating the top-p crossing token.
const TOP_P_SLACK: f64 = 1e-12;

/// Generation parameters: how a token is drawn from the predicted distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// `0` means greedy decoding.
    pub temperature: f64,
    pub top_k: Option<usize>,
    pub top_p: Option<f64>,
    pub seed: u64,
    pub max_tokens: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { temperature: 1.0, top_k: None, top_p: None, seed: 0, max_tokens: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("temperature must be finite and >= 0, got {0}")]
    Temperature(f64),
    #[error("top_k must be >= 1")]
    TopK,
    #[error("top_p must lie in (0, 1], got {0}")]
    TopP(f64),
    #[error("max_tokens must be >= 1")]
    MaxTokens,
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ParamError::Temperature(self.temperature));
        }
        if self.top_k == Some(0) {
            return Err(ParamError::TopK);
        }
        if let Some(p) = self.top_p {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ParamError::TopP(p));
            }
        }
        if self.max_tokens == 0 {
            return Err(ParamError::MaxTokens);
        }
        Ok(())
    }

    pub fn greedy(max_tokens: usize) -> Self {
        Self { temperature: 0.0, max_tokens, ..Self::default() }
    }
}

fn by_prob_desc<K: Ord>(a: &(K, f64), b: &(K, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// `p'_i ∝ p_i^(1/T)`; `T = 0` gives a point mass on the argmax.
pub fn apply_temperature<K: Ord + Clone>(dist: &Distribution<K>, temperature: f64) -> Distribution<K> {
    if temperature == 1.0 {
        return dist.clone();
    }
    if temperature == 0.0 {
        return match dist.argmax() {
            Some(k) => Distribution::point_mass(k.clone()),
            None => dist.clone(),
        };
    }
    let logs: Vec<f64> = dist
        .entries()
        .iter()
        .map(|e| if e.1 > 0.0 { libm::log(e.1) / temperature } else { f64::NEG_INFINITY })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs
        .iter()
        .map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { libm::exp(l - max) })
        .collect();
    let total: f64 = weights.iter().sum();
    let entries = dist
        .entries()
        .iter()
        .zip(weights)
        .map(|(e, w)| (e.0.clone(), w / total))
        .collect();
    Distribution::from_sorted_unchecked(entries)
}

fn renormalized_subset<K: Ord + Clone>(mut kept: Vec<(K, f64)>) -> Distribution<K> {
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    let total: f64 = kept.iter().map(|e| e.1).sum();
    for e in &mut kept {
        e.1 /= total;
    }
    Distribution::from_sorted_unchecked(kept)
}

/// Keeps the `k` most probable keys and renormalizes.
pub fn apply_top_k<K: Ord + Clone>(dist: &Distribution<K>, k: usize) -> Distribution<K> {
    let k = k.max(1);
    if k >= dist.len() {
        return dist.clone();
    }
    let mut ranked: Vec<(K, f64)> = dist.entries().to_vec();
    ranked.sort_by(by_prob_desc);
    ranked.truncate(k);
    renormalized_subset(ranked)
}

/// Keeps the smallest most-probable prefix whose mass reaches `p`
/// (the crossing key included) and renormalizes.
pub fn apply_top_p<K: Ord + Clone>(dist: &Distribution<K>, p: f64) -> Distribution<K> {
    if p >= 1.0 || dist.is_empty() {
        return dist.clone();
    }
    let mut ranked: Vec<(K, f64)> = dist.entries().to_vec();
    ranked.sort_by(by_prob_desc);
    let mut cum = 0.0;
    let mut keep = ranked.len();
    for (i, e) in ranked.iter().enumerate() {
        cum += e.1;
        if cum >= p - TOP_P_SLACK {
            keep = i + 1;
            break;
        }
    }
    ranked.truncate(keep);
    renormalized_subset(ranked)
}

/// The full transform stack for `params`.
pub fn transform<K: Ord + Clone>(dist: &Distribution<K>, params: &SamplingParams) -> Distribution<K> {
    let mut d = apply_temperature(dist, params.temperature);
    if let Some(k) = params.top_k {
        d = apply_top_k(&d, k);
    }
    if let Some(p) = params.top_p {
        d = apply_top_p(&d, p);
    }
    d
}

/// One categorical draw, scanning keys in order.
pub fn draw<K: Ord + Clone>(dist: &Distribution<K>, rng: &mut ChaCha8Rng) -> Option<K> {
    if dist.len() == 1 {
        return Some(dist.entries()[0].0.clone());
    }
    let u = unit_f64(rng);
    let mut cum = 0.0;
    let mut last = None;
    for e in dist.entries() {
        if e.1 <= 0.0 {
            continue;
        }
        cum += e.1;
        last = Some(&e.0);
        if u < cum {
            return Some(e.0.clone());
        }
    }
    last.cloned()
}

pub fn sample_next<K: Ord + Clone>(
    dist: &Distribution<K>,
    params: &SamplingParams,
    rng: &mut ChaCha8Rng,
) -> Option<K> {
    draw(&transform(dist, params), rng)
}
