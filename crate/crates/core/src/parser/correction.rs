use super::{parse_output, GripperMode, OutputMode, ParsedOutput};
use crate::chat::{ChatBackend, ChatError, ChatMessage, ChatParams, Role};

/// Correction rounds allowed per output.
pub const MAX_CORRECTIONS: usize = 3;

/// What to do with the latest assistant message.
#[derive(Debug, Clone, PartialEq)]
pub enum Attempt<T> {
    /// Accept it.
    Done(T),
    /// Reject it; the text is sent back as a correction request.
    Retry(String),
    /// Answer it without counting a correction (e.g. an object-detection
    /// result requested by the model). Limited separately.
    Reply(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrected<T> {
    /// The accepted value, or the last rejection reason once the budget ran out.
    pub outcome: Result<T, String>,
    pub corrections: usize,
    pub replies: usize,
    /// Backend calls made by the loop.
    pub queries: usize,
}

/// Runs the check-and-correct loop on the assistant message at the end of
/// `history`, appending every exchange to it.
pub fn correction_loop<T>(
    backend: &mut dyn ChatBackend,
    params: &ChatParams,
    history: &mut Vec<ChatMessage>,
    max_corrections: usize,
    max_replies: usize,
    mut check: impl FnMut(&str) -> Attempt<T>,
) -> Result<Corrected<T>, ChatError> {
    let mut corrections = 0;
    let mut replies = 0;
    let mut queries = 0;
    loop {
        let last = history
            .last()
            .filter(|m| m.role == Role::Assistant)
            .ok_or_else(|| ChatError::InvalidHistory("history must end with an assistant message".into()))?;
        let feedback = match check(&last.content) {
            Attempt::Done(v) => {
                return Ok(Corrected {
                    outcome: Ok(v),
                    corrections,
                    replies,
                    queries,
                })
            }
            Attempt::Reply(text) if replies < max_replies => {
                replies += 1;
                text
            }
            Attempt::Reply(text) | Attempt::Retry(text) => {
                if corrections == max_corrections {
                    return Ok(Corrected {
                        outcome: Err(text),
                        corrections,
                        replies,
                        queries,
                    });
                }
                corrections += 1;
                text
            }
        };
        history.push(ChatMessage::user(feedback));
        let reply = backend.chat(history, params)?;
        queries += 1;
        history.push(reply);
    }
}

/// Parses the last assistant message, asking for corrections on parse errors.
pub fn correct_output(
    backend: &mut dyn ChatBackend,
    params: &ChatParams,
    history: &mut Vec<ChatMessage>,
    mode: OutputMode,
    gripper: GripperMode,
) -> Result<(ParsedOutput, usize), ChatError> {
    let r = correction_loop(backend, params, history, MAX_CORRECTIONS, 0, |text| {
        match parse_output(text, mode, gripper) {
            Ok(p) => Attempt::Done(p),
            Err(e) => Attempt::Retry(e.to_string()),
        }
    })?;
    let parsed = r.outcome.unwrap_or_else(ParsedOutput::Invalid);
    Ok((parsed, r.corrections))
}
