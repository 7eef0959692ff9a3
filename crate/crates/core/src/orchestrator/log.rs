use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::BBox3D;
use crate::sim::Snapshot;

/// World state at one tick as written to the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub attempt: usize,
    pub tick: u64,
    pub gripper: [f64; 4],
    pub gripper_open: bool,
    pub objects: BTreeMap<String, BBox3D>,
}

impl TickRecord {
    pub fn from_snapshot(attempt: usize, s: &Snapshot) -> Self {
        Self {
            attempt,
            tick: s.tick,
            gripper: s.gripper.to_row(),
            gripper_open: s.gripper_open,
            objects: s.objects.clone(),
        }
    }
}

/// One line of `episode.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EpisodeRecord {
    Attempt { attempt: usize, seed: u64 },
    Tick(TickRecord),
    Verdict { attempt: usize, llm_verdict: bool, checker_verdict: bool },
    End { task_completed: bool, replans_used: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("episode log line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The record stream of one episode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub records: Vec<EpisodeRecord>,
}

impl EpisodeLog {
    pub fn push(&mut self, r: EpisodeRecord) {
        self.records.push(r);
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            serde_json::to_writer(&mut out, r).expect("records always serialize");
            out.push(b'\n');
        }
        out
    }

    pub fn from_jsonl(bytes: &[u8]) -> Result<Self, LogError> {
        let text = String::from_utf8_lossy(bytes);
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|source| LogError::Parse { line: i + 1, source }))
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn ticks(&self) -> impl Iterator<Item = &TickRecord> {
        self.records.iter().filter_map(|r| match r {
            EpisodeRecord::Tick(t) => Some(t),
            _ => None,
        })
    }

    /// Index of the last attempt that recorded any ticks.
    pub fn last_attempt(&self) -> Option<usize> {
        self.ticks().map(|t| t.attempt).max()
    }

    /// Ticks of the last attempt, in order.
    pub fn final_attempt_ticks(&self) -> Vec<TickRecord> {
        match self.last_attempt() {
            Some(a) => self.ticks().filter(|t| t.attempt == a).cloned().collect(),
            None => Vec::new(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_jsonl())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, LogError> {
        Self::from_jsonl(&fs::read(path)?)
    }
}

/// `<root>/<task>/<seed>/episode.jsonl`
pub fn log_path(root: impl AsRef<Path>, task_id: &str, seed: u64) -> PathBuf {
    root.as_ref().join(task_id).join(seed.to_string()).join("episode.jsonl")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_line_schema() {
        let mut objects = BTreeMap::new();
        objects.insert("cube".to_string(), BBox3D::canonical([0.1, 0.4, 0.02], 0.0, 0.04, 0.04, 0.04));
        let log = EpisodeLog {
            records: vec![
                EpisodeRecord::Attempt { attempt: 1, seed: 3 },
                EpisodeRecord::Tick(TickRecord {
                    attempt: 1,
                    tick: 0,
                    gripper: [0.0, 0.3, 0.4, 0.0],
                    gripper_open: true,
                    objects,
                }),
                EpisodeRecord::End { task_completed: false, replans_used: 0 },
            ],
        };
        let bytes = log.to_jsonl();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"type":"attempt","attempt":1,"seed":3}"#);
        assert_eq!(
            lines[1],
            r#"{"type":"tick","attempt":1,"tick":0,"gripper":[0.0,0.3,0.4,0.0],"gripper_open":true,"objects":{"cube":{"position":[0.1,0.4,0.02],"orientation":0.0,"dimensions":[0.04,0.04,0.04]}}}"#
        );
        assert_eq!(EpisodeLog::from_jsonl(&bytes).unwrap(), log);
        assert_eq!(log.final_attempt_ticks().len(), 1);
    }

    #[test]
    fn bad_line_reports_position() {
        let err = EpisodeLog::from_jsonl(b"{\"type\":\"end\",\"task_completed\":true,\"replans_used\":0}\nnot json\n")
            .unwrap_err();
        assert!(matches!(err, LogError::Parse { line: 2, .. }));
    }

    #[test]
    fn path_pattern() {
        assert_eq!(log_path("runs", "pick_apple", 4), PathBuf::from("runs/pick_apple/4/episode.jsonl"));
    }
}
