use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::{validate_history, ChatBackend, ChatError, ChatMessage, ChatParams};

pub const API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    /// Base URL of a chat-completions compatible API, e.g. `https://host/v1`.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Sleep before each retry; its length is the retry count.
    pub backoff: Vec<Duration>,
}

impl LiveConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            backoff: vec![Duration::from_secs(1), Duration::from_secs(2)],
        }
    }

    /// Reads the API key from the environment.
    pub fn from_env(base_url: impl Into<String>, model: impl Into<String>) -> Result<Self, ChatError> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| ChatError::MissingApiKey(API_KEY_ENV.into()))?;
        Ok(Self {
            api_key: Some(key),
            ..Self::new(base_url, model)
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Talks to a chat-completions HTTP endpoint.
pub struct LiveBackend {
    config: LiveConfig,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Self {
        Self { config }
    }

    fn request_body(&self, history: &[ChatMessage], params: &ChatParams) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": history,
            "temperature": params.temperature,
        });
        if let Some(n) = params.max_tokens {
            body["max_tokens"] = json!(n);
        }
        body
    }

    fn once(&self, body: &str, params: &ChatParams) -> Result<ChatMessage, ChatError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(params.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent
            .post(&self.config.endpoint())
            .header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send(body).map_err(map_ureq)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_ureq)?;
        if !(200..300).contains(&status) {
            return Err(ChatError::Http { status, body: text });
        }
        parse_completion(&text)
    }
}

fn map_ureq(e: ureq::Error) -> ChatError {
    match e {
        ureq::Error::Timeout(_) => ChatError::BackendTimeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ChatError::BackendTimeout,
        other => ChatError::Transport(other.to_string()),
    }
}

fn parse_completion(text: &str) -> Result<ChatMessage, ChatError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ChatError::BadResponse(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ChatError::BadResponse("no choices[0].message.content".into()))?;
    Ok(ChatMessage::assistant(content))
}

impl ChatBackend for LiveBackend {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError> {
        validate_history(history)?;
        let body = self.request_body(history, params).to_string();
        let mut attempt = 0;
        loop {
            match self.once(&body, params) {
                Err(e) if e.is_transient() && attempt < self.config.backoff.len() => {
                    log::warn!("chat request failed ({e}); retrying");
                    thread::sleep(self.config.backoff[attempt]);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn model(&self) -> &str {
        &self.config.model
    }
}
