//! OpenAI-compatible chat-completion and embedding client.
//!
//! Transient failures (transport errors, 429, 5xx) are retried with
//! exponential backoff up to `max_attempts` total attempts. A process-wide
//! counting gate bounds the number of requests in flight.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{
    estimate_tokens, Embedder, GenerationRequest, GenerationResponse, Generator, LlmError,
    TokenUsage,
};

/// Environment variable consulted for the API key.
pub const API_KEY_ENV: &str = "DEVSIM_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub base_url: String,
    pub model: String,
    pub embedding_model: String,
    #[serde(skip)]
    pub api_key: Option<String>,
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000/v1".into(),
            model: "gpt-4o".into(),
            embedding_model: "text-embedding-3-small".into(),
            api_key: None,
            max_attempts: 3,
            initial_backoff_ms: 500,
            max_in_flight: 4,
            timeout_secs: 120,
        }
    }
}

impl HttpConfig {
    /// Fills `api_key` from [`API_KEY_ENV`] when unset.
    pub fn with_env_key(mut self) -> Self {
        if self.api_key.is_none() {
            self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

/// One HTTP POST of a JSON body. Split out so retries can be observed.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &Value,
    ) -> Result<TransportResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &Value,
    ) -> Result<TransportResponse, String> {
        let mut req = self
            .agent
            .post(url)
            .header("Content-Type", "application/json");
        if let Some(key) = api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send(body.to_string()).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(TransportResponse { status, body })
    }
}

struct InFlightGate {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct GatePermit<'a>(&'a InFlightGate);

impl InFlightGate {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        GatePermit(self)
    }
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.0.freed.notify_one();
    }
}

pub struct HttpBackend<T: Transport = UreqTransport> {
    config: HttpConfig,
    transport: T,
    gate: InFlightGate,
}

impl HttpBackend<UreqTransport> {
    pub fn new(config: HttpConfig) -> Self {
        let transport = UreqTransport::new(Duration::from_secs(config.timeout_secs));
        Self::with_transport(config, transport)
    }
}

fn is_transient(status: u16) -> bool {
    status == 429 || status >= 500
}

impl<T: Transport> HttpBackend<T> {
    pub fn with_transport(config: HttpConfig, transport: T) -> Self {
        let gate = InFlightGate::new(config.max_in_flight);
        Self {
            config,
            transport,
            gate,
        }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.config.base_url.trim_end_matches('/'), path)
    }

    /// POST with retries; returns the successful response body.
    fn post_with_retries(&self, url: &str, body: &Value) -> Result<String, LlmError> {
        let attempts = self.config.max_attempts.max(1);
        let mut last_err = None;
        for attempt in 1..=attempts {
            let outcome = {
                let _permit = self.gate.acquire();
                self.transport
                    .post_json(url, self.config.api_key.as_deref(), body)
            };
            match outcome {
                Ok(resp) if (200..300).contains(&resp.status) => return Ok(resp.body),
                Ok(resp) => {
                    let err = LlmError::Status {
                        status: resp.status,
                        attempts: attempt,
                        message: truncate(&resp.body, 500),
                    };
                    if !is_transient(resp.status) {
                        return Err(err);
                    }
                    last_err = Some(err);
                }
                Err(message) => {
                    last_err = Some(LlmError::Transport {
                        attempts: attempt,
                        message,
                    });
                }
            }
            if attempt < attempts {
                let backoff = self.config.initial_backoff_ms << (attempt - 1);
                log::warn!("request to {url} failed (attempt {attempt}/{attempts}); retrying in {backoff} ms");
                std::thread::sleep(Duration::from_millis(backoff));
            }
        }
        Err(last_err.expect("at least one attempt was made"))
    }
}

fn truncate(text: &str, max_chars: usize) -> String {
    text.chars().take(max_chars).collect()
}

impl<T: Transport> Generator for HttpBackend<T> {
    fn backend_id(&self) -> String {
        format!("http:{}", self.config.model)
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, LlmError> {
        request.validate()?;
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        let raw = self.post_with_retries(&self.endpoint("chat/completions"), &body)?;
        parse_chat_response(&raw, request, self.backend_id())
    }
}

fn parse_chat_response(
    raw: &str,
    request: &GenerationRequest,
    backend_id: String,
) -> Result<GenerationResponse, LlmError> {
    let value: Value =
        serde_json::from_str(raw).map_err(|e| LlmError::Malformed(format!("{e}: {raw}")))?;
    let choice = value
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| LlmError::Malformed("response has no choices".into()))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Malformed("choice has no message content".into()))?
        .to_string();
    let truncated = choice.get("finish_reason").and_then(Value::as_str) == Some("length");
    let usage = match value.get("usage") {
        Some(u) => TokenUsage {
            prompt: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0) as u32,
            completion: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0) as u32,
        },
        None => TokenUsage {
            prompt: (estimate_tokens(&request.system_prompt)
                + estimate_tokens(&request.user_prompt)) as u32,
            completion: estimate_tokens(&text) as u32,
        },
    };
    Ok(GenerationResponse {
        text,
        usage,
        backend_id,
        truncated,
    })
}

impl<T: Transport> Embedder for HttpBackend<T> {
    fn embedder_id(&self) -> String {
        format!("http:{}", self.config.embedding_model)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        if texts.is_empty() {
            return Err(LlmError::InvalidRequest("no texts to embed".into()));
        }
        let body = json!({"model": self.config.embedding_model, "input": texts});
        let raw = self.post_with_retries(&self.endpoint("embeddings"), &body)?;
        let value: Value =
            serde_json::from_str(&raw).map_err(|e| LlmError::Malformed(e.to_string()))?;
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| LlmError::Malformed("embedding response has no data".into()))?;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item
                .get("index")
                .and_then(Value::as_u64)
                .map_or(pos, |i| i as usize);
            let vector = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| LlmError::Malformed("item has no embedding".into()))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| LlmError::Malformed("non-numeric embedding".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((index, vector));
        }
        if rows.len() != texts.len() {
            return Err(LlmError::Malformed(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                rows.len()
            )));
        }
        rows.sort_by_key(|(i, _)| *i);
        Ok(rows.into_iter().map(|(_, v)| v).collect())
    }
}
