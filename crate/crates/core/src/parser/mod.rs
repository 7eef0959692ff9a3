//! Parsing of model output: fenced code blocks, tagged numeric trajectories,
//! trajectory validation, and the bounded correction loop.

mod code;
mod correction;
mod numeric;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use code::{extract_code_blocks, DEFAULT_LANGUAGE};
pub use correction::{correct_output, correction_loop, Attempt, Corrected, MAX_CORRECTIONS};
pub use numeric::{format_trajectory, parse_numeric_trajectory, CLOSE_TAG, OPEN_TAG};
pub use validate::{validate_trajectory, Violation, MAX_STEP_GAP};

use crate::geometry::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    #[default]
    Code,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GripperMode {
    #[default]
    Explicit,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedOutput {
    CodeBlocks(Vec<String>),
    NumericTrajectory(Trajectory),
    Invalid(String),
}

impl ParsedOutput {
    pub fn is_valid(&self) -> bool {
        !matches!(self, ParsedOutput::Invalid(_))
    }
}

/// Reasons an output could not be parsed. The `Display` text is what the
/// model is shown when asked to correct itself.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unterminated code block: {0}")]
    UnterminatedFence(String),
    #[error("no ```{0} code block found; put the program between ```{0} and ``` lines")]
    NoCode(String),
    #[error("missing trajectory tags: write the trajectory between <trajectory> and </trajectory>")]
    MissingTags,
    #[error("row {0} has the wrong number of values: expected {1}, found {2}")]
    BadArity(usize, usize, usize),
    #[error("the trajectory must be a plain list of numbers without any Python functions (found `{0}`)")]
    ForbiddenCode(String),
    #[error("row {0} contains an invalid number: {1}")]
    BadNumber(usize, String),
    #[error("malformed trajectory at character {0}: {1}")]
    Syntax(usize, String),
    #[error("the trajectory is empty")]
    Empty,
}

/// Parses one model output according to the output and gripper modes.
pub fn parse_output(text: &str, mode: OutputMode, gripper: GripperMode) -> Result<ParsedOutput, ParseError> {
    match mode {
        OutputMode::Code => {
            let blocks = extract_code_blocks(text, DEFAULT_LANGUAGE)?;
            if blocks.is_empty() {
                Err(ParseError::NoCode(DEFAULT_LANGUAGE.into()))
            } else {
                Ok(ParsedOutput::CodeBlocks(blocks))
            }
        }
        OutputMode::Numeric => parse_numeric_trajectory(text, gripper).map(ParsedOutput::NumericTrajectory),
    }
}
