//! Prompt assembly.
//!
//! The main prompt is built from component texts in `prompts/`. Every
//! component is wrapped in a pair of delimiter comments so that switching one
//! flag off removes exactly one delimited block and nothing else.

mod config;
mod library;
mod render;

use thiserror::Error;

pub use config::{Flag, PromptConfig, PromptPlacement};
pub use library::PromptLibrary;
pub use render::{
    build_main_prompt, build_main_prompt_with, build_success_prompt, build_success_prompt_with,
    build_summary_request, build_summary_request_with, format_tracks, parse_success_verdict,
    render_verdict, section, summary_section, verdict_retry, PromptBundle, EMPTY_SUMMARY_PLACEHOLDER,
    SUMMARY_MAX_WORDS, VERDICT_PREFIX,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("invalid prompt configuration: {0}")]
    Config(String),
    #[error("missing prompt component: {0}")]
    Missing(String),
    #[error("no verdict line found in the answer")]
    VerdictUnparseable,
}
