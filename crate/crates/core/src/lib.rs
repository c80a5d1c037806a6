//! Controlled synthetic text generation and evaluation.
//!
//! The crate is `no_std` and needs only `alloc`. It covers the whole
//! generate → tune → evaluate loop:
//!
//! * [`corpus`]: documents, tokenization and the synthetic-text disclaimer policy.
//! * [`ngram`]: an absolute-discounting backoff language model with count-mixing adaptation.
//! * [`sampling`] and [`generator`]: temperature / top-k / top-p decoding and document generation.
//! * [`prompt`]: prompt templates and their expansion into labeled prompt instances.
//! * [`linear`]: TF-IDF features, a logistic classifier, and classification metrics.
//! * [`tagger`]: a BIO averaged-perceptron tagger and span-level scoring.
//! * [`tuner`]: adversarial selection of generation parameters.
//! * [`harness`]: learning curves, zero-shot training and group scoring.
//! * [`bench`]: small synthetic ground-truth tasks used to exercise all of the above.
//!
//! File formats, the HTTP backend, parallel runners and the CLI live in the
//! `syntex` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bench;
pub mod corpus;
pub mod dist;
pub mod generator;
pub mod harness;
pub mod linear;
pub mod ngram;
pub mod prompt;
pub mod rng;
pub mod sampling;
pub mod tagger;
pub mod tokenize;
pub mod tuner;

pub use corpus::{Corpus, Document, Provenance, Span};
pub use dist::Distribution;
pub use generator::{Backend, BackendError, LocalBackend, Prompt};
pub use ngram::NGramModel;
pub use sampling::SamplingParams;
pub use tokenize::{detokenize, tokenize, TokenSequence};
