//! Backend construction for the CLI: live, replayed, or the scripted expert,
//! optionally recording every session to a transcript directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use trajgen::bench::{expert_backend, DemoKind, Task};
use trajgen::chat::{
    ChatBackend, ChatError, ChatMessage, ChatParams, LiveBackend, LiveConfig, RecordingBackend, ReplayBackend,
    Transcript,
};
use trajgen::parser::OutputMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendKind {
    Live,
    Replay,
    Scripted,
}

/// `<root>/<task>/<seed>/transcript.json`, next to the episode log layout.
pub fn transcript_path(root: &Path, task_id: &str, seed: u64) -> PathBuf {
    root.join(task_id).join(seed.to_string()).join("transcript.json")
}

/// Saves its transcript when dropped, i.e. once the episode is over.
struct SavingRecorder {
    inner: RecordingBackend<Box<dyn ChatBackend>>,
    path: PathBuf,
}

impl ChatBackend for SavingRecorder {
    fn chat(&mut self, history: &[ChatMessage], params: &ChatParams) -> Result<ChatMessage, ChatError> {
        self.inner.chat(history, params)
    }

    fn model(&self) -> &str {
        self.inner.model()
    }
}

impl Drop for SavingRecorder {
    fn drop(&mut self) {
        if let Err(e) = self.inner.transcript().save(&self.path) {
            eprintln!("warning: could not save {}: {e}", self.path.display());
        }
    }
}

/// Everything needed to build one backend per (task, seed), resolved up front
/// so that building cannot fail mid-run.
pub struct Backends {
    kind: BackendKind,
    output_mode: OutputMode,
    live: Option<LiveConfig>,
    transcripts: Option<PathBuf>,
    recorded: BTreeMap<(String, u64), Transcript>,
}

impl Backends {
    pub fn prepare(
        kind: BackendKind,
        output_mode: OutputMode,
        transcripts: Option<PathBuf>,
        live: Option<LiveConfig>,
        jobs: &[(&Task, u64)],
    ) -> Result<Self> {
        let mut recorded = BTreeMap::new();
        match kind {
            BackendKind::Replay => {
                let root = transcripts.as_deref().context("--backend replay needs --transcript DIR")?;
                for (task, seed) in jobs {
                    let path = transcript_path(root, task.id(), *seed);
                    let t = Transcript::load(&path).with_context(|| format!("loading {}", path.display()))?;
                    if t.task_id != task.id() {
                        bail!("{} was recorded for task {}", path.display(), t.task_id);
                    }
                    recorded.insert((task.id().to_string(), *seed), t);
                }
            }
            BackendKind::Live if live.is_none() => bail!("--backend live needs an endpoint configuration"),
            _ => {}
        }
        Ok(Self {
            kind,
            output_mode,
            live,
            transcripts,
            recorded,
        })
    }

    pub fn build(&self, task: &Task, seed: u64) -> Box<dyn ChatBackend> {
        let inner: Box<dyn ChatBackend> = match self.kind {
            BackendKind::Replay => {
                let t = self.recorded[&(task.id().to_string(), seed)].clone();
                return Box::new(ReplayBackend::new(t));
            }
            BackendKind::Live => Box::new(LiveBackend::new(self.live.clone().expect("checked in prepare"))),
            BackendKind::Scripted => Box::new(expert_backend(task, seed, self.output_mode, vec![DemoKind::Pass])),
        };
        match &self.transcripts {
            None => inner,
            Some(root) => {
                let mut inner = RecordingBackend::new(inner, task.id());
                inner.set_seed(seed);
                Box::new(SavingRecorder {
                    inner,
                    path: transcript_path(root, task.id(), seed),
                })
            }
        }
    }
}
