use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChatBackend, ChatError, ChatMessage, ChatParams};

/// A recorded chat session.
///
/// `messages` is flat: each request contributes the messages it added on top
/// of the previous request-plus-reply (or its whole history when it starts a
/// new conversation), followed by the assistant reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub model: String,
    pub task_id: String,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub messages: Vec<ChatMessage>,
}

impl Transcript {
    pub fn new(model: impl Into<String>, task_id: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            task_id: task_id.into(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed: None,
            messages: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ChatError> {
        serde_json::from_str(text).map_err(|e| ChatError::Io(format!("bad transcript: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ChatError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ChatError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ChatError> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| ChatError::Io(format!("{}: {e}", dir.display())))?;
        }
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|e| ChatError::Io(format!("{}: {e}", path.display())))
    }

    /// Number of assistant turns.
    pub fn turns(&self) -> usize {
        self.messages
            .iter()
            .filter(|m| m.role == super::Role::Assistant)
            .count()
    }
}

/// Collapses whitespace runs to one space and trims the ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Tracks the previous request and reply to decide which messages a new
/// request adds.
#[derive(Debug, Clone, Default)]
pub(crate) struct Conversation {
    last: Vec<ChatMessage>,
}

impl Conversation {
    pub(crate) fn new_messages<'a>(&self, history: &'a [ChatMessage]) -> &'a [ChatMessage] {
        if !self.last.is_empty() && history.len() > self.last.len() && history.starts_with(&self.last) {
            &history[self.last.len()..]
        } else {
            history
        }
    }

    pub(crate) fn commit(&mut self, history: &[ChatMessage], reply: &ChatMessage) {
        self.last.clear();
        self.last.extend_from_slice(history);
        self.last.push(reply.clone());
    }
}

/// Wraps a backend and records every exchange into a [`Transcript`].
pub struct RecordingBackend<B> {
    inner: B,
    transcript: Transcript,
    conversation: Conversation,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, task_id: impl Into<String>) -> Self {
        let transcript = Transcript::new(inner.model(), task_id);
        Self {
            inner,
            transcript,
            conversation: Conversation::default(),
        }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.transcript.seed = Some(seed);
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError> {
        let reply = self.inner.chat(history, params)?;
        let fresh = self.conversation.new_messages(history).to_vec();
        self.transcript.messages.extend(fresh);
        self.transcript.messages.push(reply.clone());
        self.conversation.commit(history, &reply);
        Ok(reply)
    }

    fn model(&self) -> &str {
        self.inner.model()
    }
}
