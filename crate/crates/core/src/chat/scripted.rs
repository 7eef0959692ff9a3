use std::collections::VecDeque;

use super::{validate_history, ChatBackend, ChatError, ChatMessage, ChatParams};

type Responder = Box<dyn FnMut(&[ChatMessage]) -> Option<String> + Send>;

enum Source {
    Queue(VecDeque<String>),
    Func(Responder),
}

/// Returns programmed responses: a fixed queue, or a closure over the history.
pub struct ScriptedBackend {
    source: Source,
    requests: Vec<Vec<ChatMessage>>,
    name: String,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            source: Source::Queue(responses.into_iter().map(Into::into).collect()),
            requests: Vec::new(),
            name: "scripted".into(),
        }
    }

    /// Responds with `f(history)`; `None` means the script has run out.
    pub fn from_fn(f: impl FnMut(&[ChatMessage]) -> Option<String> + Send + 'static) -> Self {
        Self {
            source: Source::Func(Box::new(f)),
            requests: Vec::new(),
            name: "scripted".into(),
        }
    }

    pub fn with_model_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Every history this backend has been asked to answer.
    pub fn requests(&self) -> &[Vec<ChatMessage>] {
        &self.requests
    }

    pub fn calls(&self) -> usize {
        self.requests.len()
    }
}

impl ChatBackend for ScriptedBackend {
    fn chat(&mut self, history: &[ChatMessage], _params: &ChatParams) -> Result<ChatMessage, ChatError> {
        validate_history(history)?;
        self.requests.push(history.to_vec());
        let next = match &mut self.source {
            Source::Queue(q) => q.pop_front(),
            Source::Func(f) => f(history),
        };
        next.map(ChatMessage::assistant)
            .ok_or(ChatError::ScriptExhausted)
    }

    fn model(&self) -> &str {
        &self.name
    }
}
