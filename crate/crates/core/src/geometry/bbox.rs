//! Oriented 3-D boxes and minimum-area fitting.
//!
//! Boxes are yaw-oriented rectangles extruded along z. The rectangle is found
//! with rotating calipers over the XY convex hull: the minimum-area enclosing
//! rectangle always has one side collinear with a hull edge, so only hull edge
//! directions need to be tried.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::GeometryError;

const TIE_TOL: f64 = 1e-9;

/// Folds an angle into `(-π/2, π/2]`; a rectangle is symmetric under half turns.
pub fn fold_half_turn(angle: f64) -> f64 {
    let folded = angle - PI * ((angle - FRAC_PI_2) / PI).ceil();
    if folded <= -FRAC_PI_2 {
        folded + PI
    } else if folded > FRAC_PI_2 {
        folded - PI
    } else {
        folded
    }
}

/// Oriented bounding box: centre, yaw of the `w` axis, and `(w, l, h)` extents.
///
/// Canonical form has `w ≤ l` and yaw in `(-π/2, π/2]`; for square footprints the
/// yaw of smallest magnitude is kept, positive on ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox3D {
    pub position: [f64; 3],
    pub orientation: f64,
    pub dimensions: [f64; 3],
}

impl BBox3D {
    /// Builds a canonical box from an arbitrary `(w, l)` labelling of the footprint.
    pub fn canonical(position: [f64; 3], yaw: f64, w: f64, l: f64, h: f64) -> Self {
        let (w, l, yaw) = if w > l + TIE_TOL {
            (l, w, yaw + FRAC_PI_2)
        } else {
            (w, l, yaw)
        };
        let mut orientation = fold_half_turn(yaw);
        if (l - w).abs() <= TIE_TOL {
            let alt = fold_half_turn(orientation + FRAC_PI_2);
            let (a, b) = (orientation.abs(), alt.abs());
            if b < a - TIE_TOL || ((a - b).abs() <= TIE_TOL && alt > orientation) {
                orientation = alt;
            }
        }
        Self {
            position,
            orientation,
            dimensions: [w.max(0.0), l.max(0.0), h.max(0.0)],
        }
    }

    pub fn bottom(&self) -> f64 {
        self.position[2] - self.dimensions[2] / 2.0
    }

    pub fn top(&self) -> f64 {
        self.position[2] + self.dimensions[2] / 2.0
    }

    pub fn footprint_area(&self) -> f64 {
        self.dimensions[0] * self.dimensions[1]
    }

    /// Expresses a world XY point in the box frame (`w` axis first).
    pub fn to_local_xy(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.orientation.sin_cos();
        let (dx, dy) = (x - self.position[0], y - self.position[1]);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn contains_xy(&self, x: f64, y: f64, margin: f64) -> bool {
        let (lx, ly) = self.to_local_xy(x, y);
        lx.abs() <= self.dimensions[0] / 2.0 + margin && ly.abs() <= self.dimensions[1] / 2.0 + margin
    }

    pub fn contains(&self, p: [f64; 3], margin: f64) -> bool {
        self.contains_xy(p[0], p[1], margin)
            && (p[2] - self.position[2]).abs() <= self.dimensions[2] / 2.0 + margin
    }

    /// Footprint corners, counter-clockwise.
    pub fn corners_xy(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.orientation.sin_cos();
        let (hw, hl) = (self.dimensions[0] / 2.0, self.dimensions[1] / 2.0);
        let [x, y, _] = self.position;
        [(-hw, -hl), (hw, -hl), (hw, hl), (-hw, hl)]
            .map(|(a, b)| [x + c * a - s * b, y + s * a + c * b])
    }

    /// Footprint extent when projected onto the horizontal direction `angle`.
    pub fn width_along(&self, angle: f64) -> f64 {
        let d = angle - self.orientation;
        self.dimensions[0] * d.cos().abs() + self.dimensions[1] * d.sin().abs()
    }

    /// The same box moved by `(dx, dy, dz)`.
    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        let mut out = *self;
        out.position[0] += dx;
        out.position[1] += dy;
        out.position[2] += dz;
        out
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minimum-area enclosing rectangle of a point set in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub center: [f64; 2],
    /// Direction of the first side.
    pub angle: f64,
    pub extents: [f64; 2],
}

impl Rect2 {
    pub fn area(&self) -> f64 {
        self.extents[0] * self.extents[1]
    }
}

fn rect_along(points: &[[f64; 2]], angle: f64) -> Rect2 {
    let (s, c) = angle.sin_cos();
    let (mut lo_e, mut hi_e, mut lo_n, mut hi_n) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        let e = c * p[0] + s * p[1];
        let n = -s * p[0] + c * p[1];
        lo_e = lo_e.min(e);
        hi_e = hi_e.max(e);
        lo_n = lo_n.min(n);
        hi_n = hi_n.max(n);
    }
    let (me, mn) = ((lo_e + hi_e) / 2.0, (lo_n + hi_n) / 2.0);
    Rect2 {
        center: [c * me - s * mn, s * me + c * mn],
        angle,
        extents: [hi_e - lo_e, hi_n - lo_n],
    }
}

/// Rotating-calipers minimum-area rectangle. Returns `None` for empty input.
pub fn min_area_rect(points: &[[f64; 2]]) -> Option<Rect2> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => None,
        1 => Some(Rect2 {
            center: hull[0],
            angle: 0.0,
            extents: [0.0, 0.0],
        }),
        n => {
            let mut best: Option<Rect2> = None;
            for i in 0..n {
                let a = hull[i];
                let b = hull[(i + 1) % n];
                let angle = (b[1] - a[1]).atan2(b[0] - a[0]);
                let rect = rect_along(&hull, angle);
                if best.is_none_or(|r| rect.area() < r.area()) {
                    best = Some(rect);
                }
            }
            best
        }
    }
}

/// Fits the minimum-footprint oriented box around a world-frame point set.
pub fn fit_bbox3(points: &[[f64; 3]]) -> Result<BBox3D, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let xy: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    let rect = min_area_rect(&xy).ok_or(GeometryError::EmptyInput)?;
    let (zmin, zmax) = points
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p[2]), hi.max(p[2])));
    Ok(BBox3D::canonical(
        [rect.center[0], rect.center[1], (zmin + zmax) / 2.0],
        rect.angle,
        rect.extents[0],
        rect.extents[1],
        zmax - zmin,
    ))
}
