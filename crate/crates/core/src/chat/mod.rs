//! Chat-completion backends: live HTTP, transcript replay, and scripted.
//!
//! Every backend takes the full request history and returns one assistant
//! message, so the orchestrator never knows which one it is talking to.

mod live;
mod replay;
mod scripted;
mod transcript;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use live::{LiveBackend, LiveConfig};
pub use replay::ReplayBackend;
pub use scripted::ScriptedBackend;
pub use transcript::{normalize_whitespace, RecordingBackend, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatParams {
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub timeout: Duration,
}

impl Default for ChatParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            max_tokens: None,
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChatError {
    #[error("request timed out")]
    BackendTimeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("invalid request history: {0}")]
    InvalidHistory(String),
    #[error("request diverges from the recording at message {0}")]
    ReplayDivergence(usize),
    #[error("recording has no more assistant turns")]
    ReplayExhausted,
    #[error("scripted backend has no more responses")]
    ScriptExhausted,
    #[error("missing API key: set {0}")]
    MissingApiKey(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl ChatError {
    /// Whether a retry could plausibly succeed.
    pub fn is_transient(&self) -> bool {
        match self {
            ChatError::BackendTimeout | ChatError::Transport(_) => true,
            ChatError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

pub trait ChatBackend: Send {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError>;

    /// Model identifier recorded in transcripts.
    fn model(&self) -> &str;
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError> {
        (**self).chat(history, params)
    }

    fn model(&self) -> &str {
        (**self).model()
    }
}

/// Checks the request-side contract shared by all backends.
pub fn validate_history(history: &[ChatMessage]) -> Result<(), ChatError> {
    let first = history
        .iter()
        .find(|m| m.role != Role::System)
        .ok_or_else(|| ChatError::InvalidHistory("no user message".into()))?;
    if first.role != Role::User {
        return Err(ChatError::InvalidHistory(
            "first non-system message must come from the user".into(),
        ));
    }
    if let Some(i) = history
        .iter()
        .position(|m| m.role == Role::User && m.content.trim().is_empty())
    {
        return Err(ChatError::InvalidHistory(format!("message {i} is empty")));
    }
    Ok(())
}
