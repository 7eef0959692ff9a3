use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BenchError, Task};
use crate::chat::ChatBackend;
use crate::orchestrator::{run_episode, EpisodeConfig, EpisodeResult, TrialSummary};
use crate::prompt::{build_main_prompt_with, Flag};

pub const CSV_HEADER: &str = "task,variant,trials,successes,rate,executable_pct";

/// Published full-prompt mean success rate over the 30 tasks. Obtained with a
/// closed, stochastic model; shown for reference only and not reproducible here.
pub const PUBLISHED_FULL_PROMPT_MEAN: f64 = 0.573;

const UNDEFINED: &str = "n/a";

#[derive(Debug, Clone)]
pub struct Variant {
    pub name: String,
    pub config: EpisodeConfig,
}

impl Variant {
    pub fn new(name: impl Into<String>, config: EpisodeConfig) -> Self {
        Self { name: name.into(), config }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub task: String,
    pub variant: String,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub executable_pct: f64,
    pub mean_corrections: f64,
}

impl BenchRow {
    fn from_summary(variant: &str, s: &TrialSummary) -> Self {
        Self {
            task: s.task_id.clone(),
            variant: variant.to_string(),
            trials: s.trials,
            successes: s.successes,
            rate: s.rate,
            executable_pct: 100.0 * s.executable,
            mean_corrections: s.mean_corrections,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.1}",
            self.task, self.variant, self.trials, self.successes, self.rate, self.executable_pct
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub variant: String,
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<TrialSummary>,
}

impl BenchTable {
    /// Mean of per-task success rates; `None` for an empty table.
    pub fn mean(&self) -> Option<f64> {
        mean(self.rows.iter().map(|r| r.rate))
    }

    /// Percentage of all episodes whose output parsed within the correction budget.
    pub fn executable_pct(&self) -> Option<f64> {
        let (ok, n) = self.episodes().fold((0, 0), |(ok, n), e| (ok + e.executable() as usize, n + 1));
        (n > 0).then(|| 100.0 * ok as f64 / n as f64)
    }

    pub fn mean_corrections(&self) -> Option<f64> {
        mean(self.episodes().map(|e| e.corrections() as f64))
    }

    pub fn episodes(&self) -> impl Iterator<Item = &EpisodeResult> {
        self.summaries.iter().flat_map(|s| s.results.iter())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn to_report(&self) -> String {
        let w = self.rows.iter().map(|r| r.task.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "variant: {}", self.variant);
        let _ = writeln!(out, "{:<w$}  {:>6}  {:>9}  {:>7}  {:>11}", "task", "trials", "successes", "rate", "executable");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<w$}  {:>6}  {:>9}  {:>6.1}%  {:>10.1}%",
                r.task,
                r.trials,
                r.successes,
                100.0 * r.rate,
                r.executable_pct
            );
        }
        let _ = writeln!(out, "{:<w$}  {:>6}  {:>9}  {:>7}", "mean", "", "", pct(self.mean()));
        let _ = writeln!(
            out,
            "reference: published full-prompt mean {:.1}% (closed stochastic model; not reproducible)",
            100.0 * PUBLISHED_FULL_PROMPT_MEAN
        );
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |m| format!("{:.1}%", 100.0 * m))
}

/// Runs `trials` episodes per task (seeds `base_seed..`), fanned out over
/// every (task, trial) pair.
pub fn run_benchmark(
    tasks: &[&Task],
    variant: &Variant,
    trials: usize,
    base_seed: u64,
    backends: &(dyn Fn(&Variant, &Task, u64) -> Box<dyn ChatBackend> + Sync),
) -> BenchTable {
    let jobs: Vec<(usize, u64)> = (0..tasks.len())
        .flat_map(|t| (0..trials as u64).map(move |i| (t, base_seed + i)))
        .collect();
    let results: Vec<(usize, EpisodeResult)> = jobs
        .into_par_iter()
        .map(|(t, seed)| {
            let mut backend = backends(variant, tasks[t], seed);
            (t, run_episode(tasks[t], seed, &variant.config, backend.as_mut()))
        })
        .collect();
    let mut grouped: Vec<Vec<EpisodeResult>> = vec![Vec::new(); tasks.len()];
    for (t, r) in results {
        grouped[t].push(r);
    }
    let summaries: Vec<TrialSummary> = tasks
        .iter()
        .zip(grouped)
        .map(|(task, rs)| TrialSummary::from_results(task.id(), rs))
        .collect();
    BenchTable {
        variant: variant.name.clone(),
        rows: summaries.iter().map(|s| BenchRow::from_summary(&variant.name, s)).collect(),
        summaries,
    }
}

/// The base configuration followed by one variant per flag, each with that
/// component switched off.
pub fn ablation_variants(base: &EpisodeConfig, flags: &[Flag]) -> Result<Vec<Variant>, BenchError> {
    let render = |cfg: &EpisodeConfig| {
        build_main_prompt_with(&cfg.library, &cfg.prompt).map_err(|e| BenchError::Config(e.to_string()))
    };
    let base_prompt = render(base)?;
    let mut out = vec![Variant::new("full", base.clone())];
    for &flag in flags {
        let mut cfg = base.clone();
        cfg.prompt = cfg.prompt.without(flag);
        if cfg.prompt == base.prompt || render(&cfg)? == base_prompt {
            return Err(BenchError::Config(format!(
                "turning off {flag} leaves the {:?} prompt unchanged",
                base.prompt.output_mode
            )));
        }
        out.push(Variant::new(format!("no_{flag}"), cfg));
    }
    Ok(out)
}

/// Success rate per task and variant, plus per-variant executable-output
/// percentage and mean corrections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub tasks: Vec<String>,
    pub variants: Vec<String>,
    pub tables: Vec<BenchTable>,
}

impl AblationTable {
    pub fn rate(&self, task: &str, variant: &str) -> Option<f64> {
        let i = self.variants.iter().position(|v| v == variant)?;
        self.tables[i].rows.iter().find(|r| r.task == task).map(|r| r.rate)
    }

    pub fn column(&self, variant: &str) -> Option<&BenchTable> {
        let i = self.variants.iter().position(|v| v == variant)?;
        self.tables.get(i)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for t in &self.tables {
            for r in &t.rows {
                out.push_str(&r.csv_line());
                out.push('\n');
            }
        }
        out
    }

    pub fn to_report(&self) -> String {
        let w = self.tasks.iter().map(String::len).max().unwrap_or(0).max(12);
        let cols: Vec<usize> = self.variants.iter().map(|v| v.len().max(7)).collect();
        let mut out = String::new();
        let _ = write!(out, "{:<w$}", "task");
        for (v, c) in self.variants.iter().zip(&cols) {
            let _ = write!(out, "  {v:>c$}");
        }
        out.push('\n');
        let mut line = |label: &str, cell: &dyn Fn(&BenchTable) -> String| {
            let _ = write!(out, "{label:<w$}");
            for (t, c) in self.tables.iter().zip(&cols) {
                let _ = write!(out, "  {:>c$}", cell(t));
            }
            out.push('\n');
        };
        for task in &self.tasks {
            line(task, &|t| pct(t.rows.iter().find(|r| &r.task == task).map(|r| r.rate)));
        }
        line("mean", &|t| pct(t.mean()));
        line("executable", &|t| pct(t.executable_pct().map(|p| p / 100.0)));
        line("corrections", &|t| {
            t.mean_corrections().map_or_else(|| UNDEFINED.to_string(), |m| format!("{m:.2}"))
        });
        out
    }
}

pub fn run_ablation(
    variants: &[Variant],
    tasks: &[&Task],
    trials: usize,
    base_seed: u64,
    backends: &(dyn Fn(&Variant, &Task, u64) -> Box<dyn ChatBackend> + Sync),
) -> Result<AblationTable, BenchError> {
    for (i, v) in variants.iter().enumerate() {
        if variants[..i].iter().any(|u| u.name == v.name) {
            return Err(BenchError::Config(format!("duplicate variant {}", v.name)));
        }
    }
    let tables: Vec<BenchTable> = variants
        .iter()
        .map(|v| run_benchmark(tasks, v, trials, base_seed, backends))
        .collect();
    Ok(AblationTable {
        tasks: tasks.iter().map(|t| t.id().to_string()).collect(),
        variants: variants.iter().map(|v| v.name.clone()).collect(),
        tables,
    })
}
