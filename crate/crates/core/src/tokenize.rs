//! Word-level tokenizer.
//!
//! Text is split on Unicode whitespace and every character that is neither
//! alphanumeric nor whitespace becomes a token of its own. Tokens produced
//! this way never contain whitespace, so joining them with single spaces and
//! tokenizing again gives back the same sequence.

use alloc::string::String;
use alloc::vec::Vec;

pub type TokenSequence = Vec<String>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

pub fn tokenize(text: &str) -> TokenSequence {
    tokenize_with(text, TokenizerConfig::default())
}

pub fn tokenize_with(text: &str, config: TokenizerConfig) -> TokenSequence {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_punct(c) {
                if !word.is_empty() {
                    out.push(core::mem::take(&mut word));
                }
                out.push(String::from(c));
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    if config.lowercase {
        for t in &mut out {
            *t = t.to_lowercase();
        }
    }
    out
}

pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(t.as_ref());
    }
    s
}
