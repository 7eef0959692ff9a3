use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Trajectory};
use crate::sim::Workspace;

/// Largest position jump allowed between consecutive waypoints before densification.
pub const MAX_STEP_GAP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    WorkspaceViolation { index: usize, pose: Pose },
    StepTooLarge { index: usize, gap: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Empty => write!(f, "the trajectory is empty"),
            Violation::WorkspaceViolation { index, pose } => write!(
                f,
                "pose {index} ({:.3}, {:.3}, {:.3}) is outside the workspace",
                pose.x, pose.y, pose.z
            ),
            Violation::StepTooLarge { index, gap } => write!(
                f,
                "pose {index} is {gap:.3} m from the previous pose (limit {MAX_STEP_GAP} m)"
            ),
        }
    }
}

/// Lists every problem with `t`; an empty list means it is valid.
///
/// Indices count steps, including gripper commands.
pub fn validate_trajectory(t: &Trajectory, ws: &Workspace) -> Vec<Violation> {
    let mut out = Vec::new();
    if t.poses().next().is_none() {
        out.push(Violation::Empty);
        return out;
    }
    let mut prev: Option<Pose> = None;
    for (index, step) in t.steps.iter().enumerate() {
        let Some(p) = step.pose() else { continue };
        if !ws.contains(p) {
            out.push(Violation::WorkspaceViolation { index, pose: *p });
        }
        if let Some(q) = prev {
            let gap = q.distance(p);
            if gap > MAX_STEP_GAP {
                out.push(Violation::StepTooLarge { index, gap });
            }
        }
        prev = Some(*p);
    }
    out
}
