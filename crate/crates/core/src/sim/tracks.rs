use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{BBox3D, Pose};

/// Samples kept per object when tracks are handed to the model.
pub const TRACK_SAMPLE_CAP: usize = 20;

/// What produced a recorded tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickKind {
    Reset,
    Move,
    Gripper,
}

/// World state after one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub kind: TickKind,
    pub gripper: Pose,
    pub gripper_open: bool,
    pub objects: BTreeMap<String, BBox3D>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperSample {
    pub tick: u64,
    pub pose: Pose,
    pub open: bool,
}

/// Per-object box series over an episode, plus the gripper series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectTracks {
    pub objects: BTreeMap<String, Vec<(u64, BBox3D)>>,
    pub gripper: Vec<GripperSample>,
}

impl ObjectTracks {
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty() && self.gripper.is_empty()
    }
}

/// Indices of a uniform subsample of `len` items down to at most `cap`,
/// always keeping the first and last.
pub fn downsample_indices(len: usize, cap: usize) -> Vec<usize> {
    if len <= cap {
        return (0..len).collect();
    }
    if cap <= 1 {
        return vec![len - 1];
    }
    (0..cap)
        .map(|i| ((i * (len - 1)) as f64 / (cap - 1) as f64).round() as usize)
        .collect()
}

/// Builds tracks for `names` from recorded snapshots, capped per object.
pub fn build_tracks<'a>(
    history: &[Snapshot],
    names: impl IntoIterator<Item = &'a str>,
    cap: usize,
) -> ObjectTracks {
    let idx = downsample_indices(history.len(), cap);
    let mut objects = BTreeMap::new();
    for name in names {
        let series: Vec<(u64, BBox3D)> = idx
            .iter()
            .filter_map(|&i| {
                let snap = &history[i];
                snap.objects.get(name).map(|b| (snap.tick, *b))
            })
            .collect();
        if !series.is_empty() {
            objects.insert(name.to_string(), series);
        }
    }
    let gripper = idx
        .iter()
        .map(|&i| GripperSample {
            tick: history[i].tick,
            pose: history[i].gripper,
            open: history[i].gripper_open,
        })
        .collect();
    ObjectTracks { objects, gripper }
}
