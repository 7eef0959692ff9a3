use serde::{Deserialize, Serialize};

use super::pose::{shortest_arc, Pose};

pub const DEFAULT_POS_STEP: f64 = 0.01;
pub const DEFAULT_YAW_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperCommand {
    Open,
    Close,
}

impl GripperCommand {
    /// Binary-mode flag: 1 means closed.
    pub fn from_flag(closed: bool) -> Self {
        if closed {
            GripperCommand::Close
        } else {
            GripperCommand::Open
        }
    }

    pub fn is_close(self) -> bool {
        self == GripperCommand::Close
    }
}

/// One element of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Step {
    Move(Pose),
    Gripper(GripperCommand),
    /// Binary gripper mode: move to the pose, then put the gripper in the given state.
    MoveThen(Pose, GripperCommand),
}

impl Step {
    pub fn pose(&self) -> Option<&Pose> {
        match self {
            Step::Move(p) | Step::MoveThen(p, _) => Some(p),
            Step::Gripper(_) => None,
        }
    }
}

/// Ordered end-effector poses interleaved with gripper commands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps }
    }

    pub fn from_poses(poses: impl IntoIterator<Item = Pose>) -> Self {
        Self {
            steps: poses.into_iter().map(Step::Move).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> {
        self.steps.iter().filter_map(Step::pose)
    }

    /// Uses the binary five-column form.
    pub fn is_binary(&self) -> bool {
        self.steps.iter().any(|s| matches!(s, Step::MoveThen(..)))
    }
}

fn subdivisions(gap: f64, step: f64) -> usize {
    if gap <= 0.0 {
        return 0;
    }
    let mut n = (gap / step).ceil().max(1.0) as usize;
    if n > 1 && gap / (n - 1) as f64 <= step {
        n -= 1;
    }
    n
}

/// Straight-line interpolation from `a` to `b` with bounded position and yaw increments.
///
/// The yaw follows the shortest arc. Both endpoints are returned exactly.
pub fn interpolate_linear(a: Pose, b: Pose, pos_step: f64, yaw_step: f64) -> Vec<Pose> {
    assert!(pos_step > 0.0 && yaw_step > 0.0, "steps must be positive");
    let dist = a.distance(&b);
    let dyaw = shortest_arc(a.yaw, b.yaw);
    let n = subdivisions(dist, pos_step).max(subdivisions(dyaw.abs(), yaw_step));
    if n == 0 {
        return vec![a];
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(a);
    for i in 1..n {
        let t = i as f64 / n as f64;
        out.push(Pose::new(
            a.x + (b.x - a.x) * t,
            a.y + (b.y - a.y) * t,
            a.z + (b.z - a.z) * t,
            a.yaw + dyaw * t,
        ));
    }
    out.push(b);
    out
}

/// Expands every pair of consecutive poses with [`interpolate_linear`].
///
/// Gripper commands keep their position in the sequence; interpolated poses
/// between two binary-mode waypoints are plain moves, and the waypoint itself
/// keeps its gripper state.
pub fn densify(waypoints: &Trajectory, pos_step: f64, yaw_step: f64) -> Trajectory {
    let mut out = Vec::with_capacity(waypoints.len());
    let mut last: Option<Pose> = None;
    for step in &waypoints.steps {
        match step {
            Step::Gripper(_) => out.push(*step),
            Step::Move(p) | Step::MoveThen(p, _) => {
                match last {
                    None => out.push(*step),
                    Some(prev) => {
                        let seg = interpolate_linear(prev, *p, pos_step, yaw_step);
                        if seg.len() > 1 {
                            out.extend(seg[1..seg.len() - 1].iter().copied().map(Step::Move));
                            out.push(*step);
                        } else if let Step::MoveThen(_, g) = step {
                            // duplicate pose: keep only the gripper state change
                            out.push(Step::Gripper(*g));
                        }
                    }
                }
                last = Some(*p);
            }
        }
    }
    Trajectory { steps: out }
}
