//! Text embedders.
//!
//! The fallback embedder hashes character trigrams into a fixed number of
//! buckets and L2-normalizes the counts. It needs no network, is fully
//! deterministic, and gives similar texts similar vectors — enough for the
//! clustering and regression the searchers run on prompt embeddings.

use crate::error::{Error, Result};
use crate::llm::{fnv1a64, l2_normalize, Embedder};

pub const DEFAULT_EMBED_DIM: usize = 256;

/// Hashed character-trigram embedder.
#[derive(Debug, Clone)]
pub struct HashedNgramEmbedder {
    dim: usize,
}

impl HashedNgramEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashedNgramEmbedder { dim }
    }
}

impl Default for HashedNgramEmbedder {
    fn default() -> Self {
        HashedNgramEmbedder::new(DEFAULT_EMBED_DIM)
    }
}

impl Embedder for HashedNgramEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if text.is_empty() {
            return Err(Error::contract("cannot embed empty text"));
        }
        let chars: Vec<char> = text.chars().collect();
        let mut counts = vec![0.0f64; self.dim];
        if chars.len() < 3 {
            let mut buf = [0u8; 16];
            let mut bytes = Vec::new();
            for c in &chars {
                bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
            counts[(fnv1a64(&bytes) % self.dim as u64) as usize] += 1.0;
        } else {
            let mut buf = [0u8; 16];
            for window in chars.windows(3) {
                let mut bytes = Vec::with_capacity(12);
                for c in window {
                    bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
                counts[(fnv1a64(&bytes) % self.dim as u64) as usize] += 1.0;
            }
        }
        Ok(l2_normalize(counts))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

/// Remote embeddings endpoint (OpenAI-style wire format), normalized to
/// unit length. Shares the retry policy of [`crate::llm::HttpChatClient`].
pub struct HttpEmbedder {
    config: crate::llm::HttpClientConfig,
    model: String,
    dim: usize,
    http: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(config: crate::llm::HttpClientConfig, model: impl Into<String>, dim: usize) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Transport {
                message: format!("failed to build http client: {e}"),
                attempts: 0,
            })?;
        Ok(HttpEmbedder {
            config,
            model: model.into(),
            dim,
            http,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if text.is_empty() {
            return Err(Error::contract("cannot embed empty text"));
        }
        let body = serde_json::json!({
            "model": self.model,
            "input": [text],
        });
        let response = crate::llm::http::send_with_retries(&self.http, &self.config, &body)?;
        let value: serde_json::Value = serde_json::from_str(&response).map_err(|e| Error::Transport {
            message: format!("embeddings endpoint returned invalid JSON: {e}"),
            attempts: 1,
        })?;
        let vector = value["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| Error::Transport {
                message: "embeddings response missing data[0].embedding".into(),
                attempts: 1,
            })?
            .iter()
            .map(|v| v.as_f64().unwrap_or(0.0))
            .collect::<Vec<f64>>();
        if vector.len() != self.dim {
            return Err(Error::contract(format!(
                "embedding dimension mismatch: expected {}, got {}",
                self.dim,
                vector.len()
            )));
        }
        Ok(l2_normalize(vector))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_across_calls() {
        let e = HashedNgramEmbedder::default();
        let a = e.embed("improve the prompt").unwrap();
        let b = e.embed("improve the prompt").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_norm_and_fixed_dimension() {
        let e = HashedNgramEmbedder::new(64);
        for text in ["a", "ab", "abc", "a much longer piece of text"] {
            let v = e.embed(text).unwrap();
            assert_eq!(v.len(), 64);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "norm was {norm}");
        }
    }

    #[test]
    fn one_word_difference_lowers_cosine_below_one() {
        let e = HashedNgramEmbedder::default();
        let a = e.embed("classify the statement as true or false").unwrap();
        let b = e.embed("classify the sentence as true or false").unwrap();
        let cosine: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        // Oracle: trigram multisets differ, so the normalized count vectors
        // cannot be identical.
        assert!(cosine < 1.0 - 1e-9);
        assert!(cosine > 0.5, "related texts should stay similar, got {cosine}");
    }

    #[test]
    fn empty_text_is_rejected() {
        let e = HashedNgramEmbedder::default();
        assert!(e.embed("").is_err());
    }
}
