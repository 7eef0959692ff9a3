//! Kinematic tabletop simulator.
//!
//! Objects are yaw-oriented boxes (cylinders use their square hull) resting on
//! a table at z = 0. The gripper is a two-finger hand whose tool-centre point
//! is the pose it is commanded to. Grasped objects follow the gripper rigidly,
//! released objects drop onto whatever supports them, and the hand shoves
//! movable objects out of its way. Everything is deterministic given a seed.

mod collision;
mod scene;
mod tracks;
mod world;

use thiserror::Error;

pub use collision::{penetration, push_distance, xy_penetration, z_overlap};
pub use scene::{Part, Placement, Receptacle, SceneObject, Shape, TaskScene, Workspace, WORKSPACE};
pub use tracks::{
    build_tracks, downsample_indices, GripperSample, ObjectTracks, Snapshot, TickKind,
    TRACK_SAMPLE_CAP,
};
pub use world::{
    Attachment, Collision, ExecutionReport, SimState, Simulator, StepReport, WorkspaceViolation,
    COLLISION_TOL, GRASP_XY_TOL, GRASP_Z_TOL, HOME_POSE, MAX_GRASP_WIDTH, MAX_PLACEMENT_ATTEMPTS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("could not place objects for task {task} after {attempts} attempts")]
    PlacementInfeasible { task: String, attempts: usize },
    #[error("object not found: {0}")]
    ObjectNotFound(String),
}
