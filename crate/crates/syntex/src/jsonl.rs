//! Corpus persistence as JSON Lines, one document per line.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use syntex_core::corpus::CorpusError;
use syntex_core::{Corpus, Document};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Parses JSONL text. Blank lines are skipped; line numbers are 1-based.
pub fn parse_jsonl(name: &str, text: &str) -> Result<Corpus, JsonlError> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line)
            .map_err(|e| JsonlError::MalformedLine { line: i + 1, reason: e.to_string() })?;
        docs.push(doc);
    }
    Ok(Corpus::new(name, docs)?)
}

/// The corpus name is the file stem.
pub fn load_jsonl(path: &Path) -> Result<Corpus, JsonlError> {
    let text = fs::read_to_string(path).map_err(|source| JsonlError::Io { path: path.display().to_string(), source })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_jsonl(&name, &text)
}

pub fn to_jsonl(corpus: &Corpus) -> Result<String, JsonlError> {
    let mut out = String::new();
    for d in corpus {
        d.validate()?;
        out.push_str(&serde_json::to_string(d).expect("documents serialize"));
        out.push('\n');
    }
    Ok(out)
}

/// Every document is re-validated before anything touches the disk.
pub fn save_jsonl(corpus: &Corpus, path: &Path) -> Result<(), JsonlError> {
    let text = to_jsonl(corpus)?;
    let io_err = |source| JsonlError::Io { path: path.display().to_string(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}
