//! Out-of-process execution of generated programs.
//!
//! The runner child receives the program as its first message, then calls
//! back into the robot API over newline-delimited JSON on stdin/stdout. The
//! gateway answers each call with [`serve_call`] (or any other handler).

mod gateway;
mod protocol;
mod serve;

use thiserror::Error;

pub use gateway::{run_program, Limits, Outcome, RunResult, RunnerCommand};
pub use protocol::{
    load_program_message, parse_inbound, reply_message, request_message, ApiMethod, ApiRequest, ApiResponse, Inbound,
};
pub use serve::{bbox_json, serve_call, CallContext};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SandboxError {
    #[error("could not start runner: {0}")]
    Spawn(String),
}
