//! Frames, camera model, oriented box fitting and trajectory densification.

mod bbox;
mod camera;
mod pose;
mod trajectory;

pub use bbox::{convex_hull, fit_bbox3, fold_half_turn, min_area_rect, BBox3D, Rect2};
pub use camera::{deproject_mask, CameraModel, Extrinsic, PixelGrid};
pub use pose::{shortest_arc, wrap_angle, Pose};
pub use trajectory::{
    densify, interpolate_linear, GripperCommand, Step, Trajectory, DEFAULT_POS_STEP,
    DEFAULT_YAW_STEP,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("invalid depth {depth} at pixel ({u}, {v})")]
    InvalidDepth { u: usize, v: usize, depth: f64 },
    #[error("no points to fit")]
    EmptyInput,
    #[error("invalid camera model: {0}")]
    InvalidCamera(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
