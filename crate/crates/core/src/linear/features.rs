//! TF-IDF featurization.
//!
//! Terms are lowercased unigrams and (optionally) bigrams. Terms found in
//! fewer than `min_df` training documents are dropped. With `N` training
//! documents and document frequency `df`,
//! `idf = ln((1 + N) / (1 + df)) + 1`. A document vector holds raw term
//! counts times idf, scaled to unit L2 norm.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LinearError;
use crate::tokenize::{tokenize_with, TokenizerConfig};

/// Sparse vector as `(column, value)` pairs sorted by column.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// 1 for unigrams only, 2 for unigrams and bigrams.
    pub ngram_max: usize,
    pub min_df: usize,
    pub lowercase: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { ngram_max: 2, min_df: 2, lowercase: true }
    }
}

impl FeatureConfig {
    pub fn terms(&self, text: &str) -> Vec<String> {
        let toks = tokenize_with(text, TokenizerConfig { lowercase: self.lowercase });
        let mut out = Vec::with_capacity(toks.len() * self.ngram_max);
        if self.ngram_max >= 2 {
            for w in toks.windows(2) {
                out.push(format!("{} {}", w[0], w[1]));
            }
        }
        out.extend(toks);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub config: FeatureConfig,
    /// Term per column.
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl FeatureSpace {
    pub fn fit<S: AsRef<str>>(texts: &[S], config: FeatureConfig) -> Result<Self, LinearError> {
        if texts.is_empty() {
            return Err(LinearError::EmptyCorpus);
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts {
            let mut terms = config.terms(t.as_ref());
            terms.sort_unstable();
            terms.dedup();
            for term in terms {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let n = texts.len() as f64;
        let mut terms = Vec::new();
        let mut idf = Vec::new();
        for (term, d) in df {
            if d >= config.min_df {
                idf.push(libm::log((1.0 + n) / (1.0 + d as f64)) + 1.0);
                terms.push(term);
            }
        }
        Ok(Self::from_parts(config, terms, idf))
    }

    /// Rebuilds a space from stored columns. `terms` must be sorted and unique.
    pub fn from_parts(config: FeatureConfig, terms: Vec<String>, idf: Vec<f64>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { config, terms, idf, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Multiplies every idf value by `c`.
    pub fn scale_idf(&mut self, c: f64) {
        for v in &mut self.idf {
            *v *= c;
        }
    }

    pub fn transform(&self, text: &str) -> SparseVec {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for term in self.config.terms(text) {
            if let Some(&col) = self.index.get(&term) {
                *counts.entry(col).or_insert(0.0) += 1.0;
            }
        }
        let mut v: SparseVec = counts.into_iter().map(|(c, tf)| (c, tf * self.idf[c])).collect();
        let norm = libm::sqrt(v.iter().map(|e| e.1 * e.1).sum::<f64>());
        if norm > 0.0 {
            for e in &mut v {
                e.1 /= norm;
            }
        }
        v
    }
}
