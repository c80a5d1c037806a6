//! Documents, corpora and the disclaimer policy for synthetic text.
//!
//! A synthetic document always carries a non-empty disclaimer in its own
//! field. Text and disclaimer never mix, so anything that trains on `text`
//! sees neither the disclaimer nor the metadata. [`Corpus::new`] refuses
//! documents that break this rule, and every writer in the `syntex` crate
//! goes through it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::tokenize;

pub const DEFAULT_DISCLAIMER_TEMPLATE: &str = "SYNTHETIC TEXT! Do not trust the factual content of this text. Generated by {author}, {contact} to {purpose}.";

/// Display marker for synthetic text. Never written into `text`.
pub const SYNTH_MARKER: &str = "[SYNTH] ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

/// Token-indexed span `[start, end)` with a type tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize, String)", into = "(usize, usize, String)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub tag: String,
}

impl Span {
    pub fn new(start: usize, end: usize, tag: impl Into<String>) -> Self {
        Self { start, end, tag: tag.into() }
    }
}

impl From<(usize, usize, String)> for Span {
    fn from((start, end, tag): (usize, usize, String)) -> Self {
        Self { start, end, tag }
    }
}

impl From<Span> for (usize, usize, String) {
    fn from(s: Span) -> Self {
        (s.start, s.end, s.tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub spans: Option<Vec<Span>>,
    pub provenance: Provenance,
    #[serde(default)]
    pub disclaimer: Option<String>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl Document {
    pub fn real(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: None,
            spans: None,
            provenance: Provenance::Real,
            disclaimer: None,
            meta: BTreeMap::new(),
        }
    }

    /// A synthetic document without a disclaimer. It cannot enter a
    /// [`Corpus`] until [`apply_disclaimer`] has been called on it.
    pub fn synthetic_draft(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { provenance: Provenance::Synthetic, ..Self::real(id, text) }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_spans(mut self, spans: Vec<Span>) -> Self {
        self.spans = Some(spans);
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn is_synthetic(&self) -> bool {
        self.provenance == Provenance::Synthetic
    }

    /// Checks the per-document invariants: disclaimer policy and span bounds.
    pub fn validate(&self) -> Result<(), CorpusError> {
        match self.provenance {
            Provenance::Synthetic => match &self.disclaimer {
                Some(d) if !d.trim().is_empty() => {}
                _ => return Err(CorpusError::MissingDisclaimer(self.id.clone())),
            },
            Provenance::Real => {
                if self.disclaimer.is_some() {
                    return Err(CorpusError::UnexpectedDisclaimer(self.id.clone()));
                }
            }
        }
        if let Some(spans) = &self.spans {
            let n = tokenize(&self.text).len();
            let mut sorted: Vec<&Span> = spans.iter().collect();
            sorted.sort();
            let mut prev_end = 0;
            for (i, s) in sorted.iter().enumerate() {
                let bad = |reason: &str| CorpusError::InvalidSpan {
                    id: self.id.clone(),
                    reason: reason.to_string(),
                };
                if s.start >= s.end {
                    return Err(bad("start must be before end"));
                }
                if s.end > n {
                    return Err(bad("span exceeds token count"));
                }
                if s.tag.is_empty() {
                    return Err(bad("empty tag"));
                }
                if i > 0 && s.start < prev_end {
                    return Err(bad("overlapping spans"));
                }
                prev_end = s.end;
            }
        }
        Ok(())
    }
}

/// Who generated synthetic text, and why. Substituted into the disclaimer template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclaimerPolicy {
    pub template: String,
    pub author: String,
    pub contact: String,
    pub purpose: String,
}

impl Default for DisclaimerPolicy {
    fn default() -> Self {
        Self {
            template: DEFAULT_DISCLAIMER_TEMPLATE.to_string(),
            author: "syntex".to_string(),
            contact: "unknown contact".to_string(),
            purpose: "train a text classifier".to_string(),
        }
    }
}

impl DisclaimerPolicy {
    pub fn render(&self) -> String {
        self.template
            .replace("{author}", &self.author)
            .replace("{contact}", &self.contact)
            .replace("{purpose}", &self.purpose)
    }

    pub fn apply(&self, doc: Document) -> Result<Document, CorpusError> {
        apply_disclaimer(doc, &self.template, &self.author, &self.contact, &self.purpose)
    }
}

pub fn apply_disclaimer(
    mut doc: Document,
    template: &str,
    author: &str,
    contact: &str,
    purpose: &str,
) -> Result<Document, CorpusError> {
    if doc.provenance != Provenance::Synthetic {
        return Err(CorpusError::NotSynthetic(doc.id));
    }
    let text = template
        .replace("{author}", author)
        .replace("{contact}", contact)
        .replace("{purpose}", purpose);
    doc.disclaimer = Some(text);
    Ok(doc)
}

/// Text for display. Synthetic documents get the `[SYNTH]` marker; the
/// marker is never part of training text.
pub fn render_marked(doc: &Document) -> String {
    match doc.provenance {
        Provenance::Synthetic => {
            let mut s = String::from(SYNTH_MARKER);
            s.push_str(&doc.text);
            s
        }
        Provenance::Real => doc.text.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("synthetic document {0:?} has no disclaimer")]
    MissingDisclaimer(String),
    #[error("real document {0:?} carries a disclaimer")]
    UnexpectedDisclaimer(String),
    #[error("document {0:?} is not synthetic")]
    NotSynthetic(String),
    #[error("invalid span in document {id:?}: {reason}")]
    InvalidSpan { id: String, reason: String },
}

/// An ordered, validated collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId(d.id.clone()));
            }
            d.validate()?;
        }
        Ok(Self { name: name.into(), documents })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self { name: name.into(), documents: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.documents.iter().filter(|d| d.provenance == provenance).count()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.documents.iter().map(|d| d.id.as_str()).collect()
    }

    /// Subset by index, in the given order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Self {
        let documents = indices.iter().map(|&i| self.documents[i].clone()).collect();
        Self { name: name.into(), documents }
    }

    /// Concatenation; fails on id collisions.
    pub fn concat(name: impl Into<String>, parts: &[&Corpus]) -> Result<Self, CorpusError> {
        let docs = parts.iter().flat_map(|c| c.documents.iter().cloned()).collect();
        Self::new(name, docs)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = core::slice::Iter<'a, Document>;
    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}
