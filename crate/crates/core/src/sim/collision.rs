//! Separating-axis tests between yaw-oriented boxes.

use crate::geometry::BBox3D;

const EPS: f64 = 1e-9;

fn axes(b: &BBox3D) -> [[f64; 2]; 2] {
    let (s, c) = b.orientation.sin_cos();
    [[c, s], [-s, c]]
}

fn project(b: &BBox3D, axis: [f64; 2]) -> (f64, f64) {
    b.corners_xy()
        .iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Smallest footprint overlap over all separating axes; negative when apart.
pub fn xy_penetration(a: &BBox3D, b: &BBox3D) -> f64 {
    let mut min = f64::MAX;
    for axis in axes(a).into_iter().chain(axes(b)) {
        let (a0, a1) = project(a, axis);
        let (b0, b1) = project(b, axis);
        min = min.min(a1.min(b1) - a0.max(b0));
    }
    min
}

pub fn z_overlap(a: &BBox3D, b: &BBox3D) -> f64 {
    a.top().min(b.top()) - a.bottom().max(b.bottom())
}

/// Interpenetration depth of two boxes; non-positive when they do not overlap.
pub fn penetration(a: &BBox3D, b: &BBox3D) -> f64 {
    xy_penetration(a, b).min(z_overlap(a, b))
}

/// Shortest distance `obj` must travel along the unit XY direction `dir` for
/// its footprint to clear `mover`'s. Zero when already apart.
pub fn push_distance(mover: &BBox3D, obj: &BBox3D, dir: [f64; 2]) -> f64 {
    if xy_penetration(mover, obj) <= EPS || z_overlap(mover, obj) <= EPS {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for axis in axes(mover).into_iter().chain(axes(obj)) {
        let along = dir[0] * axis[0] + dir[1] * axis[1];
        if along.abs() < 1e-12 {
            continue;
        }
        let (m0, m1) = project(mover, axis);
        let (o0, o1) = project(obj, axis);
        let t = if along > 0.0 {
            (m1 - o0) / along
        } else {
            (o1 - m0) / -along
        };
        best = best.min(t.max(0.0));
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}
