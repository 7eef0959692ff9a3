use super::transcript::{normalize_whitespace, Conversation, Transcript};
use super::{ChatBackend, ChatError, ChatMessage, ChatParams, Role};

/// Serves recorded assistant turns to requests that match the recording.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    transcript: Transcript,
    cursor: usize,
    conversation: Conversation,
    strict: bool,
}

impl ReplayBackend {
    pub fn new(transcript: Transcript) -> Self {
        Self {
            transcript,
            cursor: 0,
            conversation: Conversation::default(),
            strict: false,
        }
    }

    /// Compare message contents byte for byte instead of modulo whitespace.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    /// All recorded messages have been consumed.
    pub fn is_finished(&self) -> bool {
        self.cursor >= self.transcript.messages.len()
    }

    fn same(&self, a: &ChatMessage, b: &ChatMessage) -> bool {
        a.role == b.role
            && if self.strict {
                a.content == b.content
            } else {
                normalize_whitespace(&a.content) == normalize_whitespace(&b.content)
            }
    }
}

impl ChatBackend for ReplayBackend {
    fn chat(&mut self, history: &[ChatMessage], _params: &ChatParams) -> Result<ChatMessage, ChatError> {
        let recorded = &self.transcript.messages;
        if self.cursor >= recorded.len() {
            return Err(ChatError::ReplayExhausted);
        }
        let fresh = self.conversation.new_messages(history);
        for (k, msg) in fresh.iter().enumerate() {
            let idx = self.cursor + k;
            match recorded.get(idx) {
                Some(r) if self.same(r, msg) => {}
                _ => return Err(ChatError::ReplayDivergence(idx)),
            }
        }
        let idx = self.cursor + fresh.len();
        let reply = match recorded.get(idx) {
            None => return Err(ChatError::ReplayExhausted),
            Some(r) if r.role != Role::Assistant => return Err(ChatError::ReplayDivergence(idx)),
            Some(r) => r.clone(),
        };
        self.cursor = idx + 1;
        self.conversation.commit(history, &reply);
        Ok(reply)
    }

    fn model(&self) -> &str {
        &self.transcript.model
    }
}
