use proptest::prelude::*;
use trajgen::bench::{expert_backend, Catalog, DemoKind, Task};
use trajgen::chat::{ChatMessage, Role, ScriptedBackend};
use trajgen::orchestrator::{
    query_bound, run_episode, run_trials, AttemptOutcome, EpisodeConfig, EpisodeRecord, TrialSummary,
};
use trajgen::parser::{GripperMode, OutputMode};
use trajgen::prompt::{PromptConfig, EMPTY_SUMMARY_PLACEHOLDER};
use trajgen::sandbox::RunnerCommand;

fn task(id: &str) -> Task {
    Catalog::embedded().get(id).unwrap().clone()
}

fn numeric() -> EpisodeConfig {
    EpisodeConfig::numeric(GripperMode::Explicit)
}

fn mock_runner() -> RunnerCommand {
    RunnerCommand::new(env!("CARGO_BIN_EXE_trajgen-mock-runner"))
}

#[test]
fn expert_numeric_episode_succeeds_first_time() {
    let t = task("place_apple_in_bowl");
    let mut b = expert_backend(&t, 0, OutputMode::Numeric, vec![DemoKind::Pass]);
    let r = run_episode(&t, 0, &numeric(), &mut b);
    assert_eq!(r.error, None);
    assert_eq!(r.attempts.len(), 1);
    let a = &r.attempts[0];
    assert_eq!(a.outcome, AttemptOutcome::Executed);
    assert_eq!(a.detection_rounds, 1);
    assert_eq!(a.corrections, 0);
    assert!(a.checker_verdict && a.llm_verdict && r.task_completed);
    // main prompt, detection reply, verdict
    assert_eq!(r.llm_queries, 3);
    assert_eq!(r.sandbox_spawns, 0);
    assert_eq!(r.replans_used, 0);
    let detect_reply = &a.conversation[2];
    assert_eq!(detect_reply.role, Role::User);
    assert!(detect_reply.content.starts_with("Results of your detect_object calls:"));
    assert!(detect_reply.content.contains("detect_object(\"apple\"): position ["));
}

#[test]
fn four_unparseable_outputs_make_an_invalid_attempt() {
    let t = task("pick_up_bowl");
    let mut b = ScriptedBackend::new(["no tags here"; 4]);
    let r = run_episode(&t, 0, &numeric(), &mut b);
    assert_eq!(r.attempts.len(), 1);
    assert!(matches!(r.attempts[0].outcome, AttemptOutcome::Invalid(_)));
    assert_eq!(r.attempts[0].corrections, 3);
    assert_eq!(r.llm_queries, 4);
    assert_eq!(b.calls(), 4);
    assert!(!r.executable() && !r.task_completed);
    // every correction message carries the parser's reason
    let conv = &r.attempts[0].conversation;
    let corrections: Vec<&ChatMessage> = conv.iter().skip(2).filter(|m| m.role == Role::User).collect();
    assert_eq!(corrections.len(), 3);
    assert!(corrections.iter().all(|m| m.content == corrections[0].content));
}

#[test]
fn correction_then_success() {
    let t = task("pick_up_bowl");
    let good = {
        let sim = trajgen::sim::Simulator::reset(&t.scene, 0).unwrap();
        trajgen::parser::format_trajectory(&trajgen::bench::demo_trajectory(&t, &sim, DemoKind::Pass))
    };
    let mut b = ScriptedBackend::new(vec!["oops".to_string(), good, "TASK COMPLETED: TRUE".into()]);
    let r = run_episode(&t, 0, &numeric(), &mut b);
    assert_eq!(r.corrections(), 1);
    assert!(r.executable() && r.checker_verdict());
}

#[test]
fn bowl_recovers_after_two_replans() {
    let t = task("pick_up_bowl");
    let plan = vec![DemoKind::Fail, DemoKind::Fail, DemoKind::Pass];
    let mut b = expert_backend(&t, 3, OutputMode::Numeric, plan);
    let r = run_episode(&t, 3, &numeric(), &mut b);
    assert_eq!(r.attempts.len(), 3);
    assert_eq!(r.replans_used, 2);
    assert!(r.task_completed && r.checker_verdict());
    let v: Vec<bool> = r.attempts.iter().map(|a| a.checker_verdict).collect();
    assert_eq!(v, [false, false, true]);
    // the replanned prompt carries the previous failure summary
    let prompt = &r.attempts[1].conversation[0].content;
    assert!(prompt.contains("<!-- section: replan_summary -->"));
    assert!(prompt.contains("did not hold the object"));
    assert!(r.attempts[0].summary.is_some() && r.attempts[2].summary.is_none());
    // every attempt restarts from the same layout
    let starts: Vec<_> = r
        .log
        .records
        .iter()
        .filter_map(|rec| match rec {
            EpisodeRecord::Tick(t) if t.tick == 0 => Some(t.objects["bowl"]),
            _ => None,
        })
        .collect();
    assert_eq!(starts.len(), 3);
    assert!(starts.iter().all(|b| *b == starts[0]));
    assert!(r.llm_queries <= query_bound(&numeric()));
}

#[test]
fn replans_stop_at_the_limit() {
    let t = task("pick_up_bowl");
    let mut b = expert_backend(&t, 1, OutputMode::Numeric, vec![DemoKind::Fail]);
    let r = run_episode(&t, 1, &numeric(), &mut b);
    assert_eq!(r.attempts.len(), 3);
    assert_eq!(r.replans_used, 2);
    assert!(!r.task_completed);
    // no summary is requested after the last attempt
    assert!(r.attempts[2].summary.is_none());
}

#[test]
fn unreadable_verdict_is_asked_again_then_false() {
    let t = task("pick_up_bowl");
    let good = {
        let sim = trajgen::sim::Simulator::reset(&t.scene, 0).unwrap();
        trajgen::parser::format_trajectory(&trajgen::bench::demo_trajectory(&t, &sim, DemoKind::Pass))
    };
    let mut cfg = numeric();
    cfg.max_replans = 0;
    let mut b = ScriptedBackend::new(vec![good, "looks fine".into(), "yes".into()]);
    let r = run_episode(&t, 0, &cfg, &mut b);
    assert_eq!(r.llm_queries, 3);
    assert!(!r.attempts[0].llm_verdict);
    assert!(r.attempts[0].checker_verdict);
    assert_eq!(r.attempts[0].verdict_conversation.len(), 4);
}

#[test]
fn empty_summary_falls_back_to_placeholder() {
    let t = task("pick_up_bowl");
    let bad = {
        let sim = trajgen::sim::Simulator::reset(&t.scene, 0).unwrap();
        trajgen::parser::format_trajectory(&trajgen::bench::demo_trajectory(&t, &sim, DemoKind::Fail))
    };
    let mut cfg = numeric();
    cfg.max_replans = 1;
    let mut b = ScriptedBackend::new(vec![
        bad.clone(),
        "TASK COMPLETED: FALSE".into(),
        "".into(),
        " ".into(),
        bad,
        "TASK COMPLETED: FALSE".into(),
    ]);
    let r = run_episode(&t, 0, &cfg, &mut b);
    assert_eq!(r.attempts.len(), 2);
    assert_eq!(r.attempts[0].summary.as_deref(), Some(EMPTY_SUMMARY_PLACEHOLDER));
    assert!(r.attempts[1].conversation[0].content.contains(EMPTY_SUMMARY_PLACEHOLDER));
}

#[test]
fn code_mode_runs_through_the_runner() {
    let t = task("pick_left_chip_bag");
    let cfg = EpisodeConfig::code(mock_runner(), GripperMode::Explicit);
    let mut b = expert_backend(&t, 2, OutputMode::Code, vec![DemoKind::Pass]);
    let r = run_episode(&t, 2, &cfg, &mut b);
    assert_eq!(r.error, None);
    let a = &r.attempts[0];
    assert_eq!(a.outcome, AttemptOutcome::Executed);
    assert!(a.task_completed_signal);
    assert_eq!(a.detection_rounds, 1);
    assert_eq!(r.sandbox_spawns, 2);
    assert!(r.checker_verdict() && r.llm_verdict());
}

#[test]
fn code_exception_is_fed_back() {
    let t = task("pick_left_chip_bag");
    let cfg = EpisodeConfig::code(mock_runner(), GripperMode::Explicit);
    let mut b = ScriptedBackend::new([
        "```python\nx = 1/0\n```",
        "```python\ntask_completed()\n```",
        "TASK COMPLETED: FALSE",
    ]);
    let mut cfg = cfg;
    cfg.max_replans = 0;
    let r = run_episode(&t, 0, &cfg, &mut b);
    let a = &r.attempts[0];
    assert_eq!(a.corrections, 1);
    let feedback = &a.conversation[2].content;
    assert!(feedback.contains("ZeroDivisionError"), "{feedback}");
    assert_eq!(a.outcome, AttemptOutcome::Executed);
}

#[test]
fn system_placement_splits_prompt_and_instruction() {
    let t = task("pick_up_bowl");
    let mut cfg = numeric();
    cfg.prompt = PromptConfig { placement: trajgen::prompt::PromptPlacement::System, ..cfg.prompt };
    let mut b = expert_backend(&t, 0, OutputMode::Numeric, vec![DemoKind::Pass]);
    let r = run_episode(&t, 0, &cfg, &mut b);
    let conv = &r.attempts[0].conversation;
    assert_eq!(conv[0].role, Role::System);
    assert_eq!(conv[1].role, Role::User);
    assert_eq!(conv[1].content, t.scene.instruction);
    assert!(r.checker_verdict());
}

#[test]
fn trial_rates_follow_seed_outcomes() {
    let t = task("shake_mustard_bottle");
    let factory = |seed: u64| -> Box<dyn trajgen::chat::ChatBackend> {
        let kind = if seed.is_multiple_of(2) { DemoKind::Pass } else { DemoKind::Fail };
        Box::new(expert_backend(&t, seed, OutputMode::Numeric, vec![kind]))
    };
    let mut cfg = numeric();
    cfg.max_replans = 0;
    let s: TrialSummary = run_trials(&t, 5, 0, &cfg, &factory);
    assert_eq!(s.trials, 5);
    assert_eq!(s.successes, 3);
    assert!((s.rate - 0.6).abs() < 1e-12);
    assert_eq!(s.agreement, 1.0);
    assert_eq!(s.executable, 1.0);
    let seeds: Vec<u64> = s.results.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, [0, 1, 2, 3, 4]);
}

#[derive(Debug, Clone)]
enum Reply {
    Garbage,
    Detect,
    Traj,
    True,
    False,
    Empty,
}

fn reply_strategy() -> impl Strategy<Value = Reply> {
    prop_oneof![
        Just(Reply::Garbage),
        Just(Reply::Detect),
        Just(Reply::Traj),
        Just(Reply::True),
        Just(Reply::False),
        Just(Reply::Empty),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn queries_never_exceed_the_bound(script in prop::collection::vec(reply_strategy(), 1..40)) {
        let t = task("pick_up_bowl");
        let mut k = 0usize;
        let script2 = script.clone();
        let mut b = ScriptedBackend::from_fn(move |_| {
            let r = &script2[k % script2.len()];
            k += 1;
            Some(match r {
                Reply::Garbage => "hmm".into(),
                Reply::Detect => "detect_object(\"bowl\")".into(),
                Reply::Traj => "<trajectory>[[0.0, 0.3, 0.2, 0.0], close_gripper]</trajectory>".into(),
                Reply::True => "TASK COMPLETED: TRUE".into(),
                Reply::False => "TASK COMPLETED: FALSE".into(),
                Reply::Empty => String::new(),
            })
        });
        let cfg = numeric();
        let r = run_episode(&t, 0, &cfg, &mut b);
        prop_assert!(r.llm_queries <= query_bound(&cfg));
        prop_assert_eq!(r.llm_queries, b.calls());
        prop_assert!(r.attempts.len() <= cfg.max_replans + 1);
        for a in &r.attempts {
            prop_assert!(a.corrections <= cfg.max_corrections);
            prop_assert!(a.detection_rounds <= cfg.max_detection_rounds);
        }
    }
}
