mod backend;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use trajgen::bench::{
    ablation_variants, run_ablation, run_benchmark, AblationTable, BenchTable, Catalog, Task, Variant,
    ABLATION_TASKS,
};
use trajgen::chat::{ChatBackend, LiveConfig};
use trajgen::orchestrator::{log_path, EpisodeConfig, DEFAULT_TRIALS};
use trajgen::parser::{GripperMode, OutputMode};
use trajgen::prompt::Flag;
use trajgen::sandbox::RunnerCommand;

use backend::{BackendKind, Backends};

#[derive(Parser)]
#[command(name = "trajgen", version, about = "Zero-shot trajectory generation episodes, benchmarks and ablations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes of a single task.
    Run {
        #[arg(long)]
        task: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full-prompt benchmark over a set of tasks.
    Bench {
        /// Comma-separated task ids; all tasks when omitted.
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the full prompt with variants that switch one component off.
    Ablate {
        /// Component to switch off in its own variant; repeatable.
        #[arg(long = "flag-off", required = true)]
        flag_off: Vec<String>,
        /// Comma-separated task ids; the ablation subset when omitted.
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a saved results table.
    Report {
        /// A results.json or ablation.json written by bench, run or ablate.
        path: PathBuf,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Code,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum GripperArg {
    Explicit,
    Binary,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Seed of the first trial; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "live")]
    backend: BackendKind,
    /// Transcript directory: read by replay, written by live and scripted.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "code")]
    output_mode: OutputArg,
    #[arg(long, value_enum, default_value = "explicit")]
    gripper_mode: GripperArg,
    #[arg(long)]
    max_replans: Option<usize>,
    /// Standard deviation of detection noise in meters.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Program runner for code mode; `.py` files are started with python3.
    #[arg(long)]
    runner: Option<PathBuf>,
    /// Base URL of a chat-completions API, required for the live backend.
    #[arg(long, env = "LLM_BASE_URL")]
    llm_base_url: Option<String>,
    #[arg(long, env = "LLM_MODEL")]
    llm_model: Option<String>,
    /// Directory for episode logs and result tables.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

impl Common {
    fn output_mode(&self) -> OutputMode {
        match self.output_mode {
            OutputArg::Code => OutputMode::Code,
            OutputArg::Numeric => OutputMode::Numeric,
        }
    }

    fn episode_config(&self) -> Result<EpisodeConfig> {
        let gripper = match self.gripper_mode {
            GripperArg::Explicit => GripperMode::Explicit,
            GripperArg::Binary => GripperMode::Binary,
        };
        let mut cfg = match self.output_mode() {
            OutputMode::Numeric => EpisodeConfig::numeric(gripper),
            OutputMode::Code => {
                let runner = self.runner.as_ref().context("code output mode needs --runner PATH")?;
                EpisodeConfig::code(RunnerCommand::from_path(runner), gripper)
            }
        };
        if let Some(n) = self.max_replans {
            cfg.max_replans = n;
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            bail!("--noise-sigma must be a non-negative number");
        }
        cfg.noise_sigma = self.noise_sigma;
        Ok(cfg)
    }

    fn backends(&self, transcripts: Option<PathBuf>, tasks: &[&Task]) -> Result<Backends> {
        let jobs: Vec<(&Task, u64)> = tasks
            .iter()
            .flat_map(|t| (0..self.trials as u64).map(move |i| (*t, self.seed + i)))
            .collect();
        let live = match self.backend {
            BackendKind::Live => {
                let url = self.llm_base_url.as_ref().context("--backend live needs --llm-base-url or LLM_BASE_URL")?;
                let model = self.llm_model.as_ref().context("--backend live needs --llm-model or LLM_MODEL")?;
                Some(LiveConfig::from_env(url, model)?)
            }
            _ => None,
        };
        Backends::prepare(self.backend, self.output_mode(), transcripts, live, &jobs)
    }
}

fn select<'a>(catalog: &'a Catalog, ids: &[String], default: &[&str]) -> Result<Vec<&'a Task>> {
    let ids: Vec<&str> = if ids.is_empty() { default.to_vec() } else { ids.iter().map(String::as_str).collect() };
    ids.iter().map(|id| catalog.get(id).map_err(Into::into)).collect()
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn save_logs(root: &Path, table: &BenchTable) -> Result<()> {
    for r in table.episodes() {
        let path = log_path(root, &r.task_id, r.seed);
        r.log.write(&path).with_context(|| format!("writing {}", path.display()))?;
        if let Some(e) = &r.error {
            eprintln!("{} seed {}: {e}", r.task_id, r.seed);
        }
    }
    Ok(())
}

fn bench(tasks: &[&Task], common: &Common) -> Result<()> {
    let variant = Variant::new("full", common.episode_config()?);
    let backends = common.backends(common.transcript.clone(), tasks)?;
    let factory = |_: &Variant, t: &Task, seed: u64| -> Box<dyn ChatBackend> { backends.build(t, seed) };
    let table = run_benchmark(tasks, &variant, common.trials, common.seed, &factory);
    save_logs(&common.out.join("episodes"), &table)?;
    write(&common.out.join("results.csv"), &table.to_csv())?;
    write(&common.out.join("report.txt"), &table.to_report())?;
    write(&common.out.join("results.json"), &serde_json::to_string_pretty(&table)?)?;
    print!("{}", table.to_report());
    Ok(())
}

fn ablate(flag_names: &[String], tasks: &[&Task], common: &Common) -> Result<()> {
    let flags: Vec<Flag> = flag_names
        .iter()
        .map(|n| {
            Flag::from_name(n).with_context(|| {
                let known: Vec<&str> = Flag::ALL.iter().map(|f| f.name()).collect();
                format!("unknown flag {n:?}; expected one of {}", known.join(", "))
            })
        })
        .collect::<Result<_>>()?;
    let variants = ablation_variants(&common.episode_config()?, &flags)?;
    let mut per_variant = BTreeMap::new();
    for v in &variants {
        let dir = common.transcript.as_ref().map(|d| d.join(&v.name));
        per_variant.insert(v.name.clone(), common.backends(dir, tasks)?);
    }
    let factory = |v: &Variant, t: &Task, seed: u64| -> Box<dyn ChatBackend> { per_variant[&v.name].build(t, seed) };
    let table = run_ablation(&variants, tasks, common.trials, common.seed, &factory)?;
    for t in &table.tables {
        save_logs(&common.out.join("episodes").join(&t.variant), t)?;
    }
    write(&common.out.join("ablation.csv"), &table.to_csv())?;
    write(&common.out.join("ablation_report.txt"), &table.to_report())?;
    write(&common.out.join("ablation.json"), &serde_json::to_string_pretty(&table)?)?;
    print!("{}", table.to_report());
    Ok(())
}

fn report(path: &Path, csv: bool) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let out = if let Ok(t) = serde_json::from_str::<AblationTable>(&text) {
        if csv { t.to_csv() } else { t.to_report() }
    } else {
        let t: BenchTable = serde_json::from_str(&text)
            .with_context(|| format!("{} is neither a benchmark nor an ablation table", path.display()))?;
        if csv { t.to_csv() } else { t.to_report() }
    };
    print!("{out}");
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let catalog = Catalog::embedded();
    match &cli.command {
        Command::Run { task, common } => bench(&[catalog.get(task)?], common),
        Command::Bench { tasks, common } => {
            let all: Vec<&str> = catalog.tasks().iter().map(Task::id).collect();
            bench(&select(&catalog, tasks, &all)?, common)
        }
        Command::Ablate { flag_off, tasks, common } => ablate(flag_off, &select(&catalog, tasks, &ABLATION_TASKS)?, common),
        Command::Report { path, csv } => report(path, *csv),
    }
}
