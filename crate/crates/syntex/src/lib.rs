//! File formats, the HTTP completion backend, parallel runners and the
//! command line for [`syntex_core`].

pub mod cli;
pub mod config;
pub mod formats;
pub mod jsonl;
pub mod parallel;
pub mod remote;
pub mod report;

pub use syntex_core as core;
