//! HTTP completion backend.
//!
//! `POST <base>/v1/complete` with a JSON body naming the model, prompt and
//! sampling parameters; the server answers `{"text": "..."}`. Transport
//! errors, non-200 statuses and malformed bodies are retried with doubling
//! delays, then reported as [`BackendError::Unavailable`].

use std::time::Duration;

use serde::{Deserialize, Serialize};
use syntex_core::tuner::{BackendFactory, TuneError};
use syntex_core::{Backend, BackendError, SamplingParams};

pub const TOKEN_ENV: &str = "SYNTEX_BACKEND_TOKEN";
pub const DEFAULT_RETRIES: usize = 3;
pub const DEFAULT_BACKOFF: Duration = Duration::from_millis(500);
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Serialize)]
struct CompleteRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: usize,
    temperature: f64,
    top_k: Option<usize>,
    top_p: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct CompleteResponse {
    text: String,
}

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    token: Option<String>,
    retries: usize,
    backoff: Duration,
}

impl RemoteBackend {
    /// Reads the bearer token from `SYNTEX_BACKEND_TOKEN` if set.
    pub fn new(base_url: &str, model: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(DEFAULT_TIMEOUT))
            .build()
            .into();
        Self {
            agent,
            endpoint: format!("{}/v1/complete", base_url.trim_end_matches('/')),
            model: model.into(),
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            retries: DEFAULT_RETRIES,
            backoff: DEFAULT_BACKOFF,
        }
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }

    /// `retries` extra attempts after the first, waiting `backoff · 2^i` before retry `i`.
    pub fn with_retries(mut self, retries: usize, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &str) -> Result<String, String> {
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(format!("HTTP status {status}"));
        }
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        let parsed: CompleteResponse = serde_json::from_str(&text).map_err(|e| format!("malformed response: {e}"))?;
        Ok(parsed.text)
    }
}

impl Backend for RemoteBackend {
    fn id(&self) -> String {
        format!("remote:{}", self.model)
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        let body = serde_json::to_string(&CompleteRequest {
            model: &self.model,
            prompt,
            max_tokens: params.max_tokens,
            temperature: params.temperature,
            top_k: params.top_k,
            top_p: params.top_p,
            seed: Some(params.seed),
        })
        .expect("request serializes");
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * (1u32 << (attempt - 1).min(16)));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
        }
        Err(BackendError::Unavailable(format!(
            "{} after {} attempts: {last}",
            self.endpoint,
            self.retries + 1
        )))
    }
}

/// Tuning against a remote model. The server owns the model weights, so
/// grids with an adaptation axis are refused.
#[derive(Debug, Clone)]
pub struct RemoteFactory {
    pub backend: RemoteBackend,
}

impl BackendFactory for RemoteFactory {
    type Backend = RemoteBackend;

    fn prepare(&mut self, mus: &[f64]) -> Result<(), TuneError> {
        match mus.first() {
            Some(&mu) => Err(TuneError::MissingTheta(mu)),
            None => Ok(()),
        }
    }

    fn backend(&self, mu: Option<f64>) -> Result<RemoteBackend, TuneError> {
        match mu {
            Some(mu) => Err(TuneError::MissingTheta(mu)),
            None => Ok(self.backend.clone()),
        }
    }
}
