//! Golden episode fixtures shared by the replay and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use trajgen::bench::{expert_backend, Catalog, DemoKind, Task};
use trajgen::chat::{RecordingBackend, ReplayBackend, Transcript};
use trajgen::orchestrator::{run_episode, EpisodeConfig, EpisodeResult};
use trajgen::parser::{GripperMode, OutputMode};

pub struct Golden {
    pub name: &'static str,
    pub task: &'static str,
    pub seed: u64,
    pub plan: &'static [DemoKind],
}

use DemoKind::{Fail, Pass};

pub const GOLDEN: &[Golden] = &[
    Golden { name: "pick", task: "pick_rightmost_can", seed: 2, plan: &[Pass] },
    Golden { name: "place_in_bowl", task: "place_apple_in_bowl", seed: 1, plan: &[Pass] },
    Golden { name: "push", task: "push_can_right", seed: 4, plan: &[Pass] },
    Golden { name: "shake", task: "shake_mustard_bottle", seed: 0, plan: &[Pass] },
    Golden { name: "circle", task: "draw_circle", seed: 5, plan: &[Pass] },
    Golden { name: "bowl_replan", task: "pick_up_bowl", seed: 3, plan: &[Fail, Fail, Pass] },
];

pub fn golden(name: &str) -> &'static Golden {
    GOLDEN.iter().find(|g| g.name == name).expect("known fixture")
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn transcript_path(g: &Golden) -> PathBuf {
    fixture_dir().join(format!("{}.transcript.json", g.name))
}

pub fn log_path(g: &Golden) -> PathBuf {
    fixture_dir().join(format!("{}.episode.jsonl", g.name))
}

pub fn config() -> EpisodeConfig {
    EpisodeConfig::numeric(GripperMode::Explicit)
}

pub fn task(id: &str) -> Task {
    Catalog::embedded().get(id).unwrap().clone()
}

/// Runs the expert backend under a recorder and writes both fixture files.
pub fn record(g: &Golden) -> EpisodeResult {
    let t = task(g.task);
    let inner = expert_backend(&t, g.seed, OutputMode::Numeric, g.plan.to_vec());
    let mut rec = RecordingBackend::new(inner, g.task);
    rec.set_seed(g.seed);
    let r = run_episode(&t, g.seed, &config(), &mut rec);
    rec.into_transcript().save(transcript_path(g)).unwrap();
    std::fs::write(log_path(g), r.log.to_jsonl()).unwrap();
    r
}

/// Re-runs a fixture from its recorded transcript alone.
pub fn replay(g: &Golden) -> (EpisodeResult, Vec<u8>) {
    let transcript = Transcript::load(transcript_path(g)).unwrap();
    assert_eq!(transcript.task_id, g.task);
    assert_eq!(transcript.seed, Some(g.seed));
    let mut backend = ReplayBackend::new(transcript);
    let r = run_episode(&task(g.task), g.seed, &config(), &mut backend);
    assert!(backend.is_finished(), "{}: transcript not fully consumed", g.name);
    let expected = std::fs::read(log_path(g)).unwrap();
    (r, expected)
}
