//! Pluggable LLM clients: a chat-completion trait, a deterministic scripted
//! client for offline runs, an HTTP client with retry/backoff, and text
//! embedders (hashed n-gram fallback and a remote endpoint).

mod embed;
mod http;
mod scripted;

pub use embed::{HashedNgramEmbedder, HttpEmbedder};
pub use http::{HttpChatClient, HttpClientConfig};
pub use scripted::{fingerprint, ScriptRule, ScriptedClient};

use std::sync::Arc;

use crate::error::{Error, Result};

/// One chat-completion request.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub system_text: Option<String>,
    pub user_text: String,
    pub temperature: f64,
    pub max_output: u32,
    pub model_id: String,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, user_text: impl Into<String>) -> Self {
        ChatRequest {
            system_text: None,
            user_text: user_text.into(),
            temperature: 0.0,
            max_output: 1024,
            model_id: model_id.into(),
        }
    }

    pub fn with_system(mut self, system_text: impl Into<String>) -> Self {
        self.system_text = Some(system_text.into());
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_max_output(mut self, max_output: u32) -> Self {
        self.max_output = max_output;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.user_text.trim().is_empty() {
            return Err(Error::contract("chat request user_text must be non-empty"));
        }
        if self.temperature < 0.0 {
            return Err(Error::contract("chat request temperature must be >= 0"));
        }
        Ok(())
    }
}

/// Text-generation client. Implementations must be shareable across threads.
pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

impl<F> LlmClient for F
where
    F: Fn(&ChatRequest) -> Result<String> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        request.validate()?;
        self(request)
    }
}

impl LlmClient for Arc<dyn LlmClient> {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        self.as_ref().complete(request)
    }
}

/// Text embedder. All vectors produced within a run share one dimension
/// and are L2-normalized.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
    fn dim(&self) -> usize;
}

impl Embedder for Arc<dyn Embedder> {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.as_ref().embed(text)
    }

    fn dim(&self) -> usize {
        self.as_ref().dim()
    }
}

pub(crate) fn l2_normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

/// FNV-1a, used for deterministic script fingerprints and n-gram bucketing.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
