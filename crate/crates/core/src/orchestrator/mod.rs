//! The episode loop.
//!
//! Each attempt opens a fresh conversation with the main prompt and the
//! instruction, lets the model look objects up, runs its output against the
//! simulator, and asks the model whether the recorded tracks show success.
//! A failed verdict resets the world with the same seed and starts the next
//! attempt with a summary of what went wrong.

mod episode;
mod log;
mod trials;

pub use episode::{
    query_bound, run_episode, AttemptOutcome, AttemptRecord, EpisodeConfig, EpisodeResult, Execution,
    DEFAULT_MAX_REPLANS, MAX_DETECTION_ROUNDS,
};
pub use log::{log_path, EpisodeLog, EpisodeRecord, LogError, TickRecord};
pub use trials::{run_trials, BackendFactory, TrialSummary, DEFAULT_TRIALS};
