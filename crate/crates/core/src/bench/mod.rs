//! Benchmark tasks, ground-truth checkers, and the benchmark and ablation runners.

mod checker;
mod demo;
mod report;
mod task;

use thiserror::Error;

pub use checker::{footprint_gap, Axis, CheckerSpec, Direction, ObjectRef, Rank, Spin};
pub use demo::{calibration_log, demo_trajectory, expert_backend, program_from_trajectory, DemoKind};
pub use report::{
    ablation_variants, run_ablation, run_benchmark, AblationTable, BenchRow, BenchTable, Variant,
    PUBLISHED_FULL_PROMPT_MEAN, CSV_HEADER,
};
pub use task::{check_success, Catalog, Task, ABLATION_TASKS, OUTPUT_MODE_TASKS};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown task: {0}")]
    UnknownTask(String),
    #[error("task catalog: {0}")]
    Catalog(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Log(#[from] crate::orchestrator::LogError),
}
