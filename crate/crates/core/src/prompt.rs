//! Prompt templates and their expansion into concrete prompt instances.
//!
//! A template body contains `{name}` placeholders. Expansion substitutes
//! values from the slot domains, either over the full Cartesian product or
//! over a seeded sample of some axes. Instances inherit the template's
//! intended label, which becomes the document label of everything generated
//! from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Prompt;
use crate::rng::{derive_seed, hash_str, rng_from_seed, sample_indices};

pub const HEADLINES_ASSAULT: &str = include_str!("../data/headlines_assault.txt");
pub const CITIES: &str = include_str!("../data/cities.txt");
pub const SOURCES: &str = include_str!("../data/sources.txt");
/// Populist and non-populist prompt templates in the template-file format.
/// Slot domains are empty: country and language rows are supplied by the user.
pub const POPULISM_PROMPTS_JSON: &str = include_str!("../data/populism_prompts.json");

/// Cities sampled per headline in the news preset.
pub const NEWS_CITIES_PER_HEADLINE: usize = 5;
/// Stories generated per (headline, city, source) prompt in the news preset.
pub const NEWS_STORIES_PER_PROMPT: usize = 5;
pub const ASSAULT_LABEL: &str = "ASSAULT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("placeholder {{{0}}} has no slot domain")]
    UnboundPlaceholder(String),
    #[error("slot domain {0:?} is empty")]
    EmptyDomain(String),
    #[error("malformed template body: {0}")]
    MalformedBody(String),
    #[error("value for slot {0:?} contains a brace")]
    BraceInValue(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub body: String,
    #[serde(default)]
    pub intended_label: Option<String>,
    #[serde(default)]
    pub slot_domains: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub template_id: String,
    pub filled_text: String,
    pub bindings: BTreeMap<String, String>,
    pub intended_label: Option<String>,
}

impl PromptInstance {
    /// `template_id[k=v;...]`, stable across runs.
    pub fn prompt_id(&self) -> String {
        let b: Vec<String> = self.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.template_id, b.join(";"))
    }

    pub fn to_prompt(&self) -> Prompt {
        Prompt {
            id: self.prompt_id(),
            text: self.filled_text.clone(),
            label: self.intended_label.clone(),
        }
    }
}

impl From<&PromptInstance> for Prompt {
    fn from(p: &PromptInstance) -> Self {
        p.to_prompt()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpandMode {
    FullCartesian,
    /// Draws `n_per_axis` values (without replacement) for each named axis;
    /// the other axes are expanded in full.
    Sampled { n_per_axis: usize, axes: Vec<String>, seed: u64 },
}

/// Placeholder names in order of first appearance.
pub fn placeholders(body: &str) -> Result<Vec<String>, PromptError> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find(['{', '}']) {
        if rest.as_bytes()[open] == b'}' {
            return Err(PromptError::MalformedBody("unmatched '}'".to_string()));
        }
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| PromptError::MalformedBody("unclosed '{'".to_string()))?;
        let name = &after[..close];
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(PromptError::MalformedBody(format!("bad placeholder {{{name}}}")));
        }
        if !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
        rest = &after[close + 1..];
    }
    Ok(out)
}

/// Substitutes every placeholder; fails on any unbound name.
pub fn fill(body: &str, bindings: &BTreeMap<String, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| PromptError::MalformedBody("unclosed '{'".to_string()))?;
        let name = &after[..close];
        let value = bindings
            .get(name)
            .ok_or_else(|| PromptError::UnboundPlaceholder(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn dedup_values(values: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    values.iter().filter(|v| seen.insert(v.as_str())).cloned().collect()
}

impl PromptTemplate {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        Self { id: id.into(), body: body.into(), intended_label: None, slot_domains: BTreeMap::new() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.intended_label = Some(label.into());
        self
    }

    pub fn with_domain<S: Into<String>>(mut self, name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        self.slot_domains.insert(name.into(), values.into_iter().map(Into::into).collect());
        self
    }

    fn instance(&self, bindings: BTreeMap<String, String>) -> Result<PromptInstance, PromptError> {
        Ok(PromptInstance {
            template_id: self.id.clone(),
            filled_text: fill(&self.body, &bindings)?,
            bindings,
            intended_label: self.intended_label.clone(),
        })
    }

    fn checked_domains(&self) -> Result<Vec<(String, Vec<String>)>, PromptError> {
        let names = placeholders(&self.body)?;
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let values = self
                .slot_domains
                .get(&name)
                .ok_or_else(|| PromptError::UnboundPlaceholder(name.clone()))?;
            if values.is_empty() {
                return Err(PromptError::EmptyDomain(name));
            }
            if values.iter().any(|v| v.contains(['{', '}'])) {
                return Err(PromptError::BraceInValue(name));
            }
            out.push((name, dedup_values(values)));
        }
        Ok(out)
    }

    /// Deterministic expansion. Instances come out in odometer order with the
    /// first placeholder of the body varying slowest.
    pub fn expand(&self, mode: &ExpandMode) -> Result<Vec<PromptInstance>, PromptError> {
        let mut axes = self.checked_domains()?;
        if let ExpandMode::Sampled { n_per_axis, axes: sampled, seed } = mode {
            for (name, values) in axes.iter_mut() {
                if !sampled.iter().any(|s| s == name) {
                    continue;
                }
                let s = derive_seed(*seed, &[hash_str(&self.id), hash_str(name)]);
                let mut picked = sample_indices(&mut rng_from_seed(s), values.len(), *n_per_axis);
                picked.sort_unstable();
                *values = picked.into_iter().map(|i| values[i].clone()).collect();
            }
        }
        let total: usize = axes.iter().map(|a| a.1.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut odometer = alloc::vec![0usize; axes.len()];
        for _ in 0..total {
            let bindings = axes
                .iter()
                .zip(&odometer)
                .map(|((name, values), &i)| (name.clone(), values[i].clone()))
                .collect();
            out.push(self.instance(bindings)?);
            for pos in (0..axes.len()).rev() {
                odometer[pos] += 1;
                if odometer[pos] < axes[pos].1.len() {
                    break;
                }
                odometer[pos] = 0;
            }
        }
        Ok(out)
    }

    /// Expansion over explicit rows of linked values (for example a country
    /// together with its language), instead of a Cartesian product.
    pub fn expand_rows(&self, rows: &[BTreeMap<String, String>]) -> Result<Vec<PromptInstance>, PromptError> {
        let names = placeholders(&self.body)?;
        rows.iter()
            .map(|row| {
                let mut bindings = BTreeMap::new();
                for name in &names {
                    let v = row
                        .get(name)
                        .ok_or_else(|| PromptError::UnboundPlaceholder(name.clone()))?;
                    if v.contains(['{', '}']) {
                        return Err(PromptError::BraceInValue(name.clone()));
                    }
                    bindings.insert(name.clone(), v.clone());
                }
                self.instance(bindings)
            })
            .collect()
    }
}

pub fn label_of(instance: &PromptInstance) -> Option<&str> {
    instance.intended_label.as_deref()
}

/// `<headline>\n<CITY> (<source>) -- `
pub fn render_news_prompt(headline: &str, city: &str, source: &str) -> String {
    format!("{headline}\n{} ({source}) -- ", city.to_uppercase())
}

pub fn data_lines(data: &str) -> Vec<&str> {
    data.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// One template per headline: `{city}` ranges over the uppercased cities
/// and `{source}` over the news sources.
pub fn news_templates(headlines: &[&str], cities: &[&str], sources: &[&str], label: &str) -> Vec<PromptTemplate> {
    headlines
        .iter()
        .enumerate()
        .map(|(i, h)| {
            PromptTemplate::new(format!("news-{i:03}"), format!("{h}\n{{city}} ({{source}}) -- "))
                .with_label(label)
                .with_domain("city", cities.iter().map(|c| c.to_uppercase()))
                .with_domain("source", sources.iter().copied())
        })
        .collect()
}

/// The shipped ASSAULT news preset: every headline with
/// [`NEWS_CITIES_PER_HEADLINE`] sampled cities and all sources.
pub fn si_b_news(seed: u64) -> Result<Vec<PromptInstance>, PromptError> {
    let templates = news_templates(
        &data_lines(HEADLINES_ASSAULT),
        &data_lines(CITIES),
        &data_lines(SOURCES),
        ASSAULT_LABEL,
    );
    let mode = ExpandMode::Sampled {
        n_per_axis: NEWS_CITIES_PER_HEADLINE,
        axes: alloc::vec!["city".to_string()],
        seed,
    };
    let mut out = Vec::new();
    for t in &templates {
        out.extend(t.expand(&mode)?);
    }
    Ok(out)
}
