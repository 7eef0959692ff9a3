use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle - PI) / TAU).ceil();
    // ceil can land one period off when angle - π is an exact multiple in floating point
    if wrapped <= -PI {
        wrapped + TAU
    } else if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Signed shortest rotation from `from` to `to`, in `(-π, π]`.
///
/// A rotation of exactly π resolves to the positive direction.
pub fn shortest_arc(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}

/// A 4-DoF end-effector target: position in the robot-base frame plus yaw
/// about the vertical axis.
///
/// The frame has +x to the robot's right, +y away from the robot and +z up,
/// with the table surface at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            z,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.yaw.is_finite()
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn xy_distance(&self, other: &Pose) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Composes `self ∘ rel`: `rel` is expressed in this pose's frame.
    pub fn compose(&self, rel: &Pose) -> Pose {
        let (s, c) = self.yaw.sin_cos();
        Pose::new(
            self.x + c * rel.x - s * rel.y,
            self.y + s * rel.x + c * rel.y,
            self.z + rel.z,
            self.yaw + rel.yaw,
        )
    }

    /// Expresses `other` in this pose's frame, so that `self.compose(&self.relative(other)) == other`.
    pub fn relative(&self, other: &Pose) -> Pose {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        Pose::new(
            c * dx + s * dy,
            -s * dx + c * dy,
            other.z - self.z,
            other.yaw - self.yaw,
        )
    }

    pub fn to_row(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.yaw]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_angle(TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn shortest_arc_crosses_pi() {
        let d = shortest_arc(3.0, -3.0);
        assert!((d - (TAU - 6.0)).abs() < 1e-12);
        assert_eq!(shortest_arc(0.0, PI), PI);
        assert_eq!(shortest_arc(PI / 2.0, -PI / 2.0), PI);
    }

    #[test]
    fn compose_and_relative_are_inverse() {
        let a = Pose::new(0.1, 0.4, 0.2, 0.7);
        let b = Pose::new(-0.2, 0.35, 0.05, -2.9);
        let rel = a.relative(&b);
        let back = a.compose(&rel);
        assert!(back.distance(&b) < 1e-12);
        assert!(shortest_arc(back.yaw, b.yaw).abs() < 1e-12);
    }
}
