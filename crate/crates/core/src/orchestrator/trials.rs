use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeConfig, EpisodeResult};
use crate::bench::Task;
use crate::chat::ChatBackend;

pub const DEFAULT_TRIALS: usize = 5;

/// Builds a fresh backend for the trial with the given seed.
pub type BackendFactory<'a> = dyn Fn(u64) -> Box<dyn ChatBackend> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub task_id: String,
    pub trials: usize,
    /// Episodes judged successful by the task's checker.
    pub successes: usize,
    pub rate: f64,
    /// Fraction of episodes whose final LLM verdict matches the checker.
    pub agreement: f64,
    /// Fraction of episodes whose outputs all parsed within the correction budget.
    pub executable: f64,
    pub mean_corrections: f64,
    pub results: Vec<EpisodeResult>,
}

impl TrialSummary {
    pub fn from_results(task_id: &str, results: Vec<EpisodeResult>) -> Self {
        let n = results.len();
        let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let successes = results.iter().filter(|r| r.checker_verdict()).count();
        let agree = results.iter().filter(|r| r.llm_verdict() == r.checker_verdict()).count();
        let executable = results.iter().filter(|r| r.executable()).count();
        let corrections: usize = results.iter().map(EpisodeResult::corrections).sum();
        Self {
            task_id: task_id.to_string(),
            trials: n,
            successes,
            rate: frac(successes),
            agreement: frac(agree),
            executable: frac(executable),
            mean_corrections: if n == 0 { 0.0 } else { corrections as f64 / n as f64 },
            results,
        }
    }
}

/// Runs `n` episodes with seeds `base_seed..base_seed + n` in parallel, each
/// with its own backend and simulator. Results are kept in seed order.
pub fn run_trials(
    task: &Task,
    n: usize,
    base_seed: u64,
    cfg: &EpisodeConfig,
    backends: &BackendFactory<'_>,
) -> TrialSummary {
    let results: Vec<EpisodeResult> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed + i;
            let mut backend = backends(seed);
            run_episode(task, seed, cfg, backend.as_mut())
        })
        .collect();
    TrialSummary::from_results(&task.scene.id, results)
}
