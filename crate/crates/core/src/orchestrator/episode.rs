use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::log::{EpisodeLog, EpisodeRecord, TickRecord};
use crate::bench::Task;
use crate::chat::{ChatBackend, ChatError, ChatMessage, ChatParams};
use crate::geometry::{BBox3D, Pose, Trajectory, DEFAULT_POS_STEP, DEFAULT_YAW_STEP};
use crate::parser::{
    correction_loop, parse_output, Attempt, GripperMode, OutputMode, ParsedOutput, MAX_CORRECTIONS, OPEN_TAG,
};
use crate::prompt::{
    build_main_prompt_with, build_success_prompt_with, build_summary_request_with, parse_success_verdict,
    verdict_retry, PromptBundle, PromptConfig, PromptLibrary, EMPTY_SUMMARY_PLACEHOLDER,
};
use crate::sandbox::{
    run_program, serve_call, ApiMethod, CallContext, Limits, Outcome, RunResult, RunnerCommand,
};
use crate::sim::{ExecutionReport, ObjectTracks, Simulator};

pub const DEFAULT_MAX_REPLANS: usize = 2;
/// Uncounted detection answers per attempt.
pub const MAX_DETECTION_ROUNDS: usize = 3;

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub prompt: PromptConfig,
    pub library: PromptLibrary,
    pub max_replans: usize,
    pub max_corrections: usize,
    pub max_detection_rounds: usize,
    pub noise_sigma: f64,
    pub pos_step: f64,
    pub yaw_step: f64,
    pub chat: ChatParams,
    /// Required in code mode.
    pub runner: Option<RunnerCommand>,
    pub limits: Limits,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            prompt: PromptConfig::default(),
            library: PromptLibrary::embedded(),
            max_replans: DEFAULT_MAX_REPLANS,
            max_corrections: MAX_CORRECTIONS,
            max_detection_rounds: MAX_DETECTION_ROUNDS,
            noise_sigma: 0.0,
            pos_step: DEFAULT_POS_STEP,
            yaw_step: DEFAULT_YAW_STEP,
            chat: ChatParams::default(),
            runner: None,
            limits: Limits::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn numeric(gripper: GripperMode) -> Self {
        Self {
            prompt: PromptConfig::full(OutputMode::Numeric, gripper),
            ..Self::default()
        }
    }

    pub fn code(runner: RunnerCommand, gripper: GripperMode) -> Self {
        Self {
            prompt: PromptConfig::full(OutputMode::Code, gripper),
            runner: Some(runner),
            ..Self::default()
        }
    }
}

/// Upper bound on backend queries for one episode under `cfg`.
pub fn query_bound(cfg: &EpisodeConfig) -> usize {
    let attempts = cfg.max_replans + 1;
    let per_attempt = 1 + cfg.max_corrections + cfg.max_detection_rounds + 2;
    attempts * per_attempt + cfg.max_replans * 2
}

/// One run of the model's output against the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Execution {
    Program { code: String, result: RunResult },
    Numeric { trajectory: Trajectory, report: ExecutionReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum AttemptOutcome {
    /// The output ran to completion.
    Executed,
    /// No usable output within the correction budget.
    Invalid(String),
    /// The backend or the sandbox failed; the episode stops.
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: usize,
    pub conversation: Vec<ChatMessage>,
    pub executions: Vec<Execution>,
    pub corrections: usize,
    pub detection_rounds: usize,
    pub outcome: AttemptOutcome,
    /// The program called `task_completed()` (always false in numeric mode).
    pub task_completed_signal: bool,
    pub tracks: ObjectTracks,
    pub verdict_conversation: Vec<ChatMessage>,
    pub llm_verdict: bool,
    pub checker_verdict: bool,
    pub final_poses: BTreeMap<String, Pose>,
    /// Failure summary requested after this attempt, if a replan followed.
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub seed: u64,
    pub attempts: Vec<AttemptRecord>,
    pub task_completed: bool,
    pub replans_used: usize,
    #[serde(default)]
    pub manual_error_label: Option<String>,
    pub llm_queries: usize,
    pub sandbox_spawns: usize,
    /// Why the episode stopped early, if it did.
    pub error: Option<String>,
    pub log: EpisodeLog,
}

impl EpisodeResult {
    pub fn checker_verdict(&self) -> bool {
        self.attempts.last().is_some_and(|a| a.checker_verdict)
    }

    pub fn llm_verdict(&self) -> bool {
        self.attempts.last().is_some_and(|a| a.llm_verdict)
    }

    /// Every attempt produced output that parsed within the correction budget.
    pub fn executable(&self) -> bool {
        !self.attempts.is_empty() && self.attempts.iter().all(|a| a.outcome == AttemptOutcome::Executed)
    }

    pub fn corrections(&self) -> usize {
        self.attempts.iter().map(|a| a.corrections).sum()
    }

    pub fn final_pose(&self, object: &str) -> Option<Pose> {
        self.attempts.last()?.final_poses.get(object).copied()
    }
}

/// Counts every call going to the wrapped backend.
struct Counting<'a> {
    inner: &'a mut dyn ChatBackend,
    calls: usize,
}

impl ChatBackend for Counting<'_> {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError> {
        self.calls += 1;
        self.inner.chat(history, params)
    }

    fn model(&self) -> &str {
        self.inner.model()
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn describe_detection(query: &str, result: &Result<BBox3D, String>) -> String {
    match result {
        Ok(b) => format!(
            "detect_object(\"{query}\"): position [{}, {}, {}], orientation {}, dimensions [{}, {}, {}]",
            num(b.position[0]),
            num(b.position[1]),
            num(b.position[2]),
            num(b.orientation),
            num(b.dimensions[0]),
            num(b.dimensions[1]),
            num(b.dimensions[2]),
        ),
        Err(e) => format!("detect_object(\"{query}\"): error: {e}"),
    }
}

fn detection_reply(results: &[(String, Result<BBox3D, String>)]) -> String {
    let mut out = String::from("Results of your detect_object calls:\n");
    for (q, r) in results {
        out.push_str(&describe_detection(q, r));
        out.push('\n');
    }
    out.push_str("Continue with the task.");
    out
}

fn program_feedback(outcome: &Outcome, limits: &Limits) -> Option<String> {
    match outcome {
        Outcome::Completed => None,
        Outcome::Exception(tb) => Some(format!("Your code raised an error:\n{tb}\nFix the code and output it again.")),
        Outcome::Timeout => Some(format!(
            "Your code did not finish within {} seconds. Output a program that finishes.",
            limits.wall_clock.as_secs()
        )),
        Outcome::ProtocolError(e) => Some(format!("Your code could not be run: {e}")),
    }
}

/// What ended the turn loop of one attempt.
enum TurnEnd {
    Executed,
    Fatal(String),
}

struct AttemptState<'a> {
    sim: &'a mut Simulator,
    cfg: &'a EpisodeConfig,
    executions: Vec<Execution>,
    detection_rounds: usize,
    task_completed_signal: bool,
    spawns: usize,
}

impl AttemptState<'_> {
    fn code_turn(&mut self, text: &str) -> Attempt<TurnEnd> {
        let blocks = match parse_output(text, OutputMode::Code, self.cfg.prompt.gripper_mode) {
            Ok(ParsedOutput::CodeBlocks(b)) => b,
            Ok(other) => return Attempt::Retry(format!("unexpected output: {other:?}")),
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let Some(runner) = &self.cfg.runner else {
            return Attempt::Done(TurnEnd::Fatal("code mode needs a runner".into()));
        };
        let code = blocks.join("\n\n");
        let mut ctx = CallContext {
            noise_sigma: self.cfg.noise_sigma,
            pos_step: self.cfg.pos_step,
            yaw_step: self.cfg.yaw_step,
            task_completed: false,
        };
        let mut detections = Vec::new();
        let sim = &mut *self.sim;
        let mut handler = |req: &crate::sandbox::ApiRequest| {
            let resp = serve_call(req, sim, &mut ctx);
            if req.method == ApiMethod::DetectObject {
                let q = req.params.get("object").and_then(|v| v.as_str()).unwrap_or_default();
                let parsed = resp
                    .clone()
                    .and_then(|v| serde_json::from_value::<BBox3D>(v).map_err(|e| e.to_string()));
                detections.push((q.to_string(), parsed));
            }
            resp
        };
        self.spawns += 1;
        let result = match run_program(&code, runner, &self.cfg.limits, &mut handler) {
            Ok(r) => r,
            Err(e) => return Attempt::Done(TurnEnd::Fatal(e.to_string())),
        };
        let feedback = program_feedback(&result.outcome, &self.cfg.limits);
        self.executions.push(Execution::Program { code, result });
        if let Some(f) = feedback {
            return Attempt::Retry(f);
        }
        if ctx.task_completed {
            self.task_completed_signal = true;
            return Attempt::Done(TurnEnd::Executed);
        }
        if !detections.is_empty() && self.detection_rounds < self.cfg.max_detection_rounds {
            self.detection_rounds += 1;
            return Attempt::Reply(detection_reply(&detections));
        }
        Attempt::Done(TurnEnd::Executed)
    }

    fn numeric_turn(&mut self, text: &str, detect_re: &Regex) -> Attempt<TurnEnd> {
        if !text.contains(OPEN_TAG) && self.detection_rounds < self.cfg.max_detection_rounds {
            let queries: Vec<String> = detect_re.captures_iter(text).map(|c| c[1].to_string()).collect();
            if !queries.is_empty() {
                self.detection_rounds += 1;
                let results: Vec<_> = queries
                    .into_iter()
                    .map(|q| {
                        let r = self.sim.detect_object(&q, self.cfg.noise_sigma).map_err(|e| e.to_string());
                        (q, r)
                    })
                    .collect();
                return Attempt::Reply(detection_reply(&results));
            }
        }
        match parse_output(text, OutputMode::Numeric, self.cfg.prompt.gripper_mode) {
            Ok(ParsedOutput::NumericTrajectory(trajectory)) => {
                let report = self.sim.execute(&trajectory, self.cfg.pos_step, self.cfg.yaw_step);
                self.executions.push(Execution::Numeric { trajectory, report });
                Attempt::Done(TurnEnd::Executed)
            }
            Ok(other) => Attempt::Retry(format!("unexpected output: {other:?}")),
            Err(e) => Attempt::Retry(e.to_string()),
        }
    }
}

/// Asks for a verdict; one re-query if the answer has no verdict line, then FALSE.
fn ask_verdict(
    backend: &mut dyn ChatBackend,
    cfg: &EpisodeConfig,
    prompt: String,
) -> Result<(bool, Vec<ChatMessage>), ChatError> {
    let retry = verdict_retry(&cfg.library).map_err(|e| ChatError::InvalidHistory(e.to_string()))?;
    let mut history = vec![ChatMessage::user(prompt)];
    let reply = backend.chat(&history, &cfg.chat)?;
    history.push(reply);
    let r = correction_loop(backend, &cfg.chat, &mut history, 1, 0, |t| match parse_success_verdict(t) {
        Ok(v) => Attempt::Done(v),
        Err(_) => Attempt::Retry(retry.clone()),
    })?;
    Ok((r.outcome.unwrap_or(false), history))
}

/// Asks why the attempt failed; one re-query on an empty answer, then a placeholder.
fn ask_summary(backend: &mut dyn ChatBackend, cfg: &EpisodeConfig, prompt: String) -> Result<String, ChatError> {
    let history = vec![ChatMessage::user(prompt)];
    for _ in 0..2 {
        let reply = backend.chat(&history, &cfg.chat)?;
        if !reply.content.trim().is_empty() {
            return Ok(reply.content.trim().to_string());
        }
    }
    Ok(EMPTY_SUMMARY_PLACEHOLDER.to_string())
}

fn final_poses(sim: &Simulator) -> BTreeMap<String, Pose> {
    sim.state().objects.iter().map(|o| (o.name.clone(), o.pose)).collect()
}

/// Runs one episode: attempts, verdicts and same-seed replans. Failures are
/// recorded in the result rather than returned.
pub fn run_episode(task: &Task, seed: u64, cfg: &EpisodeConfig, backend: &mut dyn ChatBackend) -> EpisodeResult {
    let scene = &task.scene;
    let mut result = EpisodeResult {
        task_id: scene.id.clone(),
        seed,
        attempts: Vec::new(),
        task_completed: false,
        replans_used: 0,
        manual_error_label: None,
        llm_queries: 0,
        sandbox_spawns: 0,
        error: None,
        log: EpisodeLog::default(),
    };
    let main_prompt = match build_main_prompt_with(&cfg.library, &cfg.prompt) {
        Ok(p) => p,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let detect_re = Regex::new(r#"detect_object\(\s*"([^"]*)"\s*\)"#).expect("static pattern");
    let mut backend = Counting { inner: backend, calls: 0 };
    let mut bundle = PromptBundle::new(main_prompt, &scene.instruction);

    for index in 1..=cfg.max_replans + 1 {
        let mut sim = match Simulator::reset(scene, seed) {
            Ok(s) => s,
            Err(e) => {
                result.error = Some(e.to_string());
                break;
            }
        };
        result.log.push(EpisodeRecord::Attempt { attempt: index, seed });
        let mut conversation = match bundle.messages(&cfg.library, cfg.prompt.placement) {
            Ok(m) => m,
            Err(e) => {
                result.error = Some(e.to_string());
                break;
            }
        };
        let mut state = AttemptState {
            sim: &mut sim,
            cfg,
            executions: Vec::new(),
            detection_rounds: 0,
            task_completed_signal: false,
            spawns: 0,
        };
        let turn = backend.chat(&conversation, &cfg.chat).and_then(|reply| {
            conversation.push(reply);
            correction_loop(
                &mut backend,
                &cfg.chat,
                &mut conversation,
                cfg.max_corrections,
                cfg.max_detection_rounds,
                |text| match cfg.prompt.output_mode {
                    OutputMode::Code => state.code_turn(text),
                    OutputMode::Numeric => state.numeric_turn(text, &detect_re),
                },
            )
        });
        let AttemptState {
            executions,
            detection_rounds,
            task_completed_signal,
            spawns,
            ..
        } = state;
        result.sandbox_spawns += spawns;

        let (outcome, corrections) = match turn {
            Ok(c) => (
                match c.outcome {
                    Ok(TurnEnd::Executed) => AttemptOutcome::Executed,
                    Ok(TurnEnd::Fatal(e)) => AttemptOutcome::Error(e),
                    Err(reason) => AttemptOutcome::Invalid(reason),
                },
                c.corrections,
            ),
            Err(e) => (AttemptOutcome::Error(e.to_string()), 0),
        };

        let ticks: Vec<TickRecord> = sim.history().iter().map(|s| TickRecord::from_snapshot(index, s)).collect();
        let checker_verdict = task.checker.check(&ticks);
        result.log.records.extend(ticks.into_iter().map(EpisodeRecord::Tick));
        let tracks = sim.tracks();

        let mut record = AttemptRecord {
            index,
            conversation,
            executions,
            corrections,
            detection_rounds,
            outcome: outcome.clone(),
            task_completed_signal,
            tracks,
            verdict_conversation: Vec::new(),
            llm_verdict: false,
            checker_verdict,
            final_poses: final_poses(&sim),
            summary: None,
        };

        let mut stop = true;
        match &outcome {
            AttemptOutcome::Executed => {
                let verdict = build_success_prompt_with(&cfg.library, &scene.instruction, &record.tracks)
                    .map_err(|e| ChatError::InvalidHistory(e.to_string()))
                    .and_then(|p| ask_verdict(&mut backend, cfg, p));
                match verdict {
                    Ok((v, conv)) => {
                        record.llm_verdict = v;
                        record.verdict_conversation = conv;
                        stop = v || index > cfg.max_replans;
                    }
                    Err(e) => result.error = Some(e.to_string()),
                }
            }
            AttemptOutcome::Invalid(_) => {}
            AttemptOutcome::Error(e) => result.error = Some(e.clone()),
        }
        result.log.push(EpisodeRecord::Verdict {
            attempt: index,
            llm_verdict: record.llm_verdict,
            checker_verdict: record.checker_verdict,
        });

        if !stop {
            let summary = build_summary_request_with(&cfg.library, &scene.instruction, &record.tracks)
                .map_err(|e| ChatError::InvalidHistory(e.to_string()))
                .and_then(|p| ask_summary(&mut backend, cfg, p));
            match summary {
                Ok(s) => {
                    bundle = bundle.with_summary(&s);
                    record.summary = Some(s);
                }
                Err(e) => {
                    result.error = Some(e.to_string());
                    stop = true;
                }
            }
        }
        result.attempts.push(record);
        if stop {
            break;
        }
    }

    result.task_completed = result.llm_verdict();
    result.replans_used = result.attempts.len().saturating_sub(1);
    result.llm_queries = backend.calls;
    result.log.push(EpisodeRecord::End {
        task_completed: result.task_completed,
        replans_used: result.replans_used,
    });
    assert!(
        result.llm_queries <= query_bound(cfg),
        "episode made {} queries, bound is {}",
        result.llm_queries,
        query_bound(cfg)
    );
    result
}
