//! Text file formats for n-gram models, linear models and prompt templates.
//!
//! `NGLM v1`:
//!
//! ```text
//! NGLM v1 order=<k> discount=<d>
//! <context tokens, space separated>\t<token>\t<count>
//! ```
//!
//! `LINMODEL v1`:
//!
//! ```text
//! LINMODEL v1
//! features ngram_max=<n> min_df=<n> lowercase=<bool>
//! bias <f>
//! l2_lambda <f>
//! train_seed <n>
//! terms <n>
//! <term>\t<idf>\t<weight>
//! ```
//!
//! Tokens and terms are percent-encoded (controls, space, tab and `%`).

use std::fs;
use std::io;
use std::path::Path;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use syntex_core::linear::{FeatureConfig, FeatureSpace, LinearModel};
use syntex_core::ngram::LmError;
use syntex_core::prompt::PromptTemplate;
use syntex_core::NGramModel;
use thiserror::Error;

const ENCODE: &AsciiSet = &CONTROLS.add(b' ').add(b'%').add(b'\t');

pub const NGLM_MAGIC: &str = "NGLM v1";
pub const LINMODEL_MAGIC: &str = "LINMODEL v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] LmError),
}

fn parse_err(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Parse { line, reason: reason.into() }
}

pub fn encode(s: &str) -> String {
    utf8_percent_encode(s, ENCODE).to_string()
}

pub fn decode(s: &str, line: usize) -> Result<String, FormatError> {
    percent_decode_str(s)
        .decode_utf8()
        .map(|c| c.into_owned())
        .map_err(|_| parse_err(line, "invalid percent encoding"))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

fn parse_f64(s: &str, line: usize) -> Result<f64, FormatError> {
    s.parse().map_err(|_| parse_err(line, format!("bad number {s:?}")))
}

fn key_value<'a>(field: &'a str, key: &str, line: usize) -> Result<&'a str, FormatError> {
    field
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected {key}=")))
}

pub fn nglm_to_string(model: &NGramModel) -> String {
    let mut out = format!("{NGLM_MAGIC} order={} discount={}\n", model.order(), model.discount());
    for (ctx, tok, count) in model.entries() {
        let ctx: Vec<String> = ctx.iter().map(|t| encode(t)).collect();
        out.push_str(&format!("{}\t{}\t{}\n", ctx.join(" "), encode(tok), count));
    }
    out
}

/// Parses and rebuilds the model, then checks that every context normalizes.
pub fn nglm_from_str(text: &str) -> Result<NGramModel, FormatError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let rest = header.strip_prefix(NGLM_MAGIC).ok_or_else(|| parse_err(1, "missing NGLM v1 header"))?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(1, "header needs order and discount"));
    }
    let order: usize =
        key_value(fields[0], "order", 1)?.parse().map_err(|_| parse_err(1, "bad order"))?;
    let discount = parse_f64(key_value(fields[1], "discount", 1)?, 1)?;
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(parse_err(n, "expected 3 tab-separated fields"));
        }
        let ctx = if parts[0].is_empty() {
            Vec::new()
        } else {
            parts[0].split(' ').map(|t| decode(t, n)).collect::<Result<Vec<_>, _>>()?
        };
        entries.push((ctx, decode(parts[1], n)?, parse_f64(parts[2], n)?));
    }
    let model = NGramModel::from_counts(order, discount, entries)?;
    model.validate_normalization()?;
    Ok(model)
}

pub fn save_nglm(model: &NGramModel, path: &Path) -> Result<(), FormatError> {
    write_text(path, &nglm_to_string(model))
}

pub fn load_nglm(path: &Path) -> Result<NGramModel, FormatError> {
    nglm_from_str(&read_text(path)?)
}

pub fn linmodel_to_string(model: &LinearModel) -> String {
    let fs = &model.feature_space;
    let c = fs.config;
    let mut out = format!("{LINMODEL_MAGIC}\n");
    out.push_str(&format!("features ngram_max={} min_df={} lowercase={}\n", c.ngram_max, c.min_df, c.lowercase));
    out.push_str(&format!("bias {:.16e}\n", model.bias));
    out.push_str(&format!("l2_lambda {:.16e}\n", model.l2_lambda));
    out.push_str(&format!("train_seed {}\n", model.train_seed));
    out.push_str(&format!("terms {}\n", fs.len()));
    for ((term, idf), w) in fs.terms.iter().zip(&fs.idf).zip(&model.weights) {
        out.push_str(&format!("{}\t{:.16e}\t{:.16e}\n", encode(term), idf, w));
    }
    out
}

pub fn linmodel_from_str(text: &str) -> Result<LinearModel, FormatError> {
    let lines: Vec<&str> = text.lines().collect();
    let field = |i: usize, key: &str| -> Result<&str, FormatError> {
        lines
            .get(i)
            .and_then(|l| l.strip_prefix(key))
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| parse_err(i + 1, format!("expected `{key}`")))
    };
    if lines.first() != Some(&LINMODEL_MAGIC) {
        return Err(parse_err(1, "missing LINMODEL v1 header"));
    }
    let feat: Vec<&str> = field(1, "features")?.split(' ').collect();
    if feat.len() != 3 {
        return Err(parse_err(2, "features line needs three fields"));
    }
    let config = FeatureConfig {
        ngram_max: key_value(feat[0], "ngram_max", 2)?.parse().map_err(|_| parse_err(2, "bad ngram_max"))?,
        min_df: key_value(feat[1], "min_df", 2)?.parse().map_err(|_| parse_err(2, "bad min_df"))?,
        lowercase: key_value(feat[2], "lowercase", 2)?.parse().map_err(|_| parse_err(2, "bad lowercase"))?,
    };
    let bias = parse_f64(field(2, "bias")?, 3)?;
    let l2_lambda = parse_f64(field(3, "l2_lambda")?, 4)?;
    let train_seed: u64 = field(4, "train_seed")?.parse().map_err(|_| parse_err(5, "bad train_seed"))?;
    let n: usize = field(5, "terms")?.parse().map_err(|_| parse_err(6, "bad term count"))?;
    let body = &lines[6..];
    if body.len() != n {
        return Err(parse_err(7, format!("expected {n} term lines, found {}", body.len())));
    }
    let mut terms = Vec::with_capacity(n);
    let mut idf = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (i, line) in body.iter().enumerate() {
        let ln = i + 7;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(parse_err(ln, "expected 3 tab-separated fields"));
        }
        terms.push(decode(parts[0], ln)?);
        idf.push(parse_f64(parts[1], ln)?);
        weights.push(parse_f64(parts[2], ln)?);
    }
    let feature_space = FeatureSpace::from_parts(config, terms, idf);
    Ok(LinearModel { feature_space, weights, bias, l2_lambda, train_seed })
}

pub fn save_linmodel(model: &LinearModel, path: &Path) -> Result<(), FormatError> {
    write_text(path, &linmodel_to_string(model))
}

pub fn load_linmodel(path: &Path) -> Result<LinearModel, FormatError> {
    linmodel_from_str(&read_text(path)?)
}

/// A JSON array of prompt templates.
pub fn templates_from_str(text: &str) -> Result<Vec<PromptTemplate>, FormatError> {
    serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))
}

pub fn load_templates(path: &Path) -> Result<Vec<PromptTemplate>, FormatError> {
    templates_from_str(&read_text(path)?)
}
