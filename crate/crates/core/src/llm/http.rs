//! HTTP chat-completions client with retry, exponential backoff, and a
//! bounded number of in-flight requests.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::llm::{ChatRequest, LlmClient};

/// Connection settings shared by the chat and embeddings clients.
#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    /// Full URL of the chat-completions (or embeddings) endpoint.
    pub endpoint: String,
    /// Environment variable holding the bearer token; `None` sends no auth.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
    /// Retries after the first attempt; total attempts = retries + 1.
    pub retries: u32,
    /// Base delay; attempt k backs off base * 2^k.
    pub backoff_base: Duration,
    /// Maximum in-flight requests through this client.
    pub concurrency: usize,
}

impl Default for HttpClientConfig {
    fn default() -> Self {
        HttpClientConfig {
            endpoint: String::new(),
            api_key_env: None,
            timeout: Duration::from_secs(60),
            retries: 3,
            backoff_base: Duration::from_millis(250),
            concurrency: 4,
        }
    }
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(slots: usize) -> Self {
        Gate {
            slots: Mutex::new(slots.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut slots = self.slots.lock().unwrap();
        while *slots == 0 {
            slots = self.freed.wait(slots).unwrap();
        }
        *slots -= 1;
        GatePermit { gate: self }
    }
}

struct GatePermit<'a> {
    gate: &'a Gate,
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.gate.slots.lock().unwrap() += 1;
        self.gate.freed.notify_one();
    }
}

/// Chat client speaking the common chat-completions wire format: POST with
/// a JSON body of model id, system+user messages, and temperature.
pub struct HttpChatClient {
    config: HttpClientConfig,
    http: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpChatClient {
    pub fn new(config: HttpClientConfig) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Transport {
                message: format!("failed to build http client: {e}"),
                attempts: 0,
            })?;
        let gate = Gate::new(config.concurrency);
        Ok(HttpChatClient { config, http, gate })
    }
}

impl LlmClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        request.validate()?;
        let _permit = self.gate.acquire();
        let mut messages = Vec::new();
        if let Some(system) = &request.system_text {
            messages.push(serde_json::json!({"role": "system", "content": system}));
        }
        messages.push(serde_json::json!({"role": "user", "content": request.user_text}));
        let body = serde_json::json!({
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        });
        let response = send_with_retries(&self.http, &self.config, &body)?;
        extract_content(&response)
    }
}

fn extract_content(response: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(response).map_err(|e| Error::Transport {
        message: format!("chat endpoint returned invalid JSON: {e}"),
        attempts: 1,
    })?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Transport {
            message: "chat response missing choices[0].message.content".into(),
            attempts: 1,
        })
}

fn is_retryable_status(status: u16) -> bool {
    status == 429 || (500..=599).contains(&status)
}

/// POSTs `body` to the configured endpoint, retrying 429/5xx/transport
/// failures with exponential backoff up to the configured cap.
pub(crate) fn send_with_retries(
    http: &reqwest::blocking::Client,
    config: &HttpClientConfig,
    body: &serde_json::Value,
) -> Result<String> {
    let token = config
        .api_key_env
        .as_ref()
        .and_then(|var| std::env::var(var).ok());
    let attempts = config.retries + 1;
    let mut last_error = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            let delay = config.backoff_base.saturating_mul(1 << (attempt - 1).min(16));
            std::thread::sleep(delay);
        }
        let mut builder = http
            .post(&config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(token) = &token {
            builder = builder.bearer_auth(token);
        }
        match builder.json(body).send() {
            Ok(response) => {
                let status = response.status().as_u16();
                let text = response.text().unwrap_or_default();
                if (200..300).contains(&status) {
                    return Ok(text);
                }
                last_error = format!("status {status}: {}", text.chars().take(200).collect::<String>());
                if !is_retryable_status(status) {
                    return Err(Error::Transport {
                        message: last_error,
                        attempts: attempt + 1,
                    });
                }
            }
            Err(e) => {
                last_error = e.to_string();
            }
        }
    }
    Err(Error::Transport {
        message: last_error,
        attempts,
    })
}
