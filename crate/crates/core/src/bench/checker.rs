//! Ground-truth success predicates over the ticks of an episode log.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::geometry::{fold_half_turn, BBox3D};
use crate::orchestrator::{EpisodeLog, TickRecord};
use crate::sim::{xy_penetration, z_overlap, WORKSPACE};

/// Minimum travel along the stroke axis for a wiping reversal to count.
const STROKE_AMPLITUDE: f64 = 0.02;

/// Names the object a checker is about, either directly or by a rule applied
/// to the first recorded tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectRef {
    Name(String),
    Pick {
        /// Candidates; empty means every object.
        #[serde(default)]
        among: Vec<String>,
        by: Rank,
    },
}

impl From<&str> for ObjectRef {
    fn from(s: &str) -> Self {
        ObjectRef::Name(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rank {
    MinX,
    MaxX,
    MedianX,
    /// Largest distance to its nearest neighbour.
    Loneliest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Front,
    Back,
}

impl Direction {
    fn unit(self) -> [f64; 2] {
        match self {
            Direction::Left => [-1.0, 0.0],
            Direction::Right => [1.0, 0.0],
            Direction::Front => [0.0, -1.0],
            Direction::Back => [0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Ccw,
    Cw,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

fn default_table_tol() -> f64 {
    0.005
}

/// A success criterion with its parameters (metres, radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckerSpec {
    /// Highest centre rise over the episode.
    Lift { target: ObjectRef, min_gain: f64 },
    /// Final footprint gap to the reference.
    Proximity { target: ObjectRef, reference: ObjectRef, max_distance: f64 },
    /// Final footprint gap to the nearest of the other objects.
    ProximityAny { target: ObjectRef, max_distance: f64 },
    /// Proximity reached while the target never leaves the table.
    PushTo {
        target: ObjectRef,
        reference: ObjectRef,
        max_distance: f64,
        #[serde(default = "default_table_tol")]
        table_tolerance: f64,
    },
    /// Net centre displacement along a table direction.
    Displace {
        target: ObjectRef,
        direction: Direction,
        min_distance: f64,
        #[serde(default)]
        keep_on_table: bool,
        #[serde(default = "default_table_tol")]
        table_tolerance: f64,
    },
    /// Final footprint within `max_distance` of a table edge.
    EdgeDistance { target: ObjectRef, edge: Direction, max_distance: f64 },
    /// The tool comes within `tolerance` of the target at some tick.
    Touch { tool: ObjectRef, target: ObjectRef, tolerance: f64 },
    /// Final centre inside the container's footprint (or a centred inner
    /// region of the given width and length) and below its top.
    Containment {
        target: ObjectRef,
        container: ObjectRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<[f64; 2]>,
    },
    /// Final centre outside the container's footprint, resting on the table.
    OutOfContainer {
        target: ObjectRef,
        container: ObjectRef,
        #[serde(default = "default_table_tol")]
        table_tolerance: f64,
    },
    /// Final footprints no longer overlap.
    Removed { target: ObjectRef, from: ObjectRef },
    /// Longest contact run on the surface (the table when `surface` is unset)
    /// covers `min_path` with `min_turns` direction changes; the tool never
    /// touches any object in `avoid`.
    Wipe {
        tool: ObjectRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        surface: Option<ObjectRef>,
        min_path: f64,
        min_turns: usize,
        band: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        avoid: Vec<ObjectRef>,
    },
    /// Oscillation along x, y or z with reversals of at least `min_amplitude`.
    Shake { target: ObjectRef, min_reversals: usize, min_amplitude: f64 },
    /// Angle swept by the tool around the container centre while inside it.
    Stir { tool: ObjectRef, container: ObjectRef, min_sweep: f64 },
    /// Table-contact path of the tool passes near all ten vertices of a
    /// five-pointed star of the given circumradius, anywhere on the table.
    Star { tool: ObjectRef, circumradius: f64, tolerance: f64, band: f64 },
    /// Closed-gripper path at table height stays on the circle and visits every sector.
    Circle { center: [f64; 2], radius: f64, tolerance: f64, max_z: f64, sectors: usize },
    /// Target slides at least `min_displacement` on the table while the
    /// fingertips are above its centre.
    KnockOver { target: ObjectRef, min_displacement: f64 },
    /// Final long side parallel to the axis.
    AlignAxis { target: ObjectRef, axis: Axis, tolerance: f64 },
    /// Net yaw rotation while the target rises no more than `max_lift`.
    Rotate { target: ObjectRef, min_rotation: f64, spin: Spin, max_lift: f64 },
    /// Final resting on top of the rack, clear of the table.
    Hang { target: ObjectRef, rack: ObjectRef, tolerance: f64, min_clearance: f64 },
}

fn obj<'a>(t: &'a TickRecord, name: &str) -> Option<&'a BBox3D> {
    t.objects.get(name)
}

fn resolve(r: &ObjectRef, first: &TickRecord) -> Option<String> {
    match r {
        ObjectRef::Name(n) => first.objects.contains_key(n).then(|| n.clone()),
        ObjectRef::Pick { among, by } => {
            let mut cands: Vec<(&String, &BBox3D)> = if among.is_empty() {
                first.objects.iter().collect()
            } else {
                among
                    .iter()
                    .map(|n| first.objects.get_key_value(n))
                    .collect::<Option<_>>()?
            };
            if cands.is_empty() {
                return None;
            }
            let x = |b: &BBox3D| b.position[0];
            let pick = match by {
                Rank::MinX => cands.iter().min_by(|a, b| x(a.1).total_cmp(&x(b.1))),
                Rank::MaxX => cands.iter().max_by(|a, b| x(a.1).total_cmp(&x(b.1))),
                Rank::MedianX => {
                    cands.sort_by(|a, b| x(a.1).total_cmp(&x(b.1)));
                    cands.get(cands.len() / 2)
                }
                Rank::Loneliest => {
                    let nearest = |me: &BBox3D| {
                        first
                            .objects
                            .values()
                            .filter(|o| *o != me)
                            .map(|o| xy_dist(o.position, me.position))
                            .fold(f64::INFINITY, f64::min)
                    };
                    cands.iter().max_by(|a, b| nearest(a.1).total_cmp(&nearest(b.1)))
                }
            };
            pick.map(|(n, _)| (*n).clone())
        }
    }
}

fn xy_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Distance between two footprints; zero when they overlap or touch.
pub fn footprint_gap(a: &BBox3D, b: &BBox3D) -> f64 {
    if xy_penetration(a, b) >= 0.0 {
        return 0.0;
    }
    let (ca, cb) = (a.corners_xy(), b.corners_xy());
    let mut best = f64::INFINITY;
    for (pts, poly) in [(&ca, &cb), (&cb, &ca)] {
        for p in pts.iter() {
            for k in 0..4 {
                best = best.min(seg_dist(*p, poly[k], poly[(k + 1) % 4]));
            }
        }
    }
    best
}

fn on_table(b: &BBox3D, tol: f64) -> bool {
    b.bottom().abs() <= tol
}

/// Number of direction reversals of at least `amp` in `series`.
fn reversals(series: impl Iterator<Item = f64>, amp: f64) -> usize {
    let mut it = series.peekable();
    let Some(&v0) = it.peek() else { return 0 };
    let (mut hi, mut lo, mut dir, mut count) = (v0, v0, 0i8, 0);
    for v in it {
        match dir {
            0 => {
                hi = hi.max(v);
                lo = lo.min(v);
                if v - lo >= amp {
                    dir = 1;
                    hi = v;
                } else if hi - v >= amp {
                    dir = -1;
                    lo = v;
                }
            }
            1 => {
                if v > hi {
                    hi = v;
                } else if hi - v >= amp {
                    dir = -1;
                    lo = v;
                    count += 1;
                }
            }
            _ => {
                if v < lo {
                    lo = v;
                } else if v - lo >= amp {
                    dir = 1;
                    hi = v;
                    count += 1;
                }
            }
        }
    }
    count
}

/// Path length and number of back-and-forth strokes: direction reversals of at
/// least `amp` along the dominant stroke axis (length-weighted mean of the
/// segment headings, taken modulo a half turn).
fn path_stats(points: &[[f64; 2]], amp: f64) -> (f64, usize) {
    let (mut length, mut c2, mut s2) = (0.0, 0.0, 0.0);
    for w in points.windows(2) {
        let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let l = dx.hypot(dy);
        if l > 0.0 {
            let h = 2.0 * dy.atan2(dx);
            c2 += l * h.cos();
            s2 += l * h.sin();
        }
        length += l;
    }
    if length == 0.0 {
        return (0.0, 0);
    }
    let (s, c) = (0.5 * s2.atan2(c2)).sin_cos();
    (length, reversals(points.iter().map(|p| p[0] * c + p[1] * s), amp))
}

/// Runs of consecutive indices where `pred` holds.
fn runs(n: usize, mut pred: impl FnMut(usize) -> bool) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..n {
        match (pred(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..n);
    }
    out
}

/// Cumulative yaw from folded box orientations, assuming small steps.
fn unwrapped_rotation(series: &[BBox3D]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for (k, b) in series.iter().enumerate() {
        if k > 0 {
            let prev = &series[k - 1];
            let square = (b.dimensions[0] - b.dimensions[1]).abs() < 1e-9;
            let period = if square { FRAC_PI_2 } else { PI };
            let mut d = (b.orientation - prev.orientation) % period;
            if d > period / 2.0 {
                d -= period;
            } else if d <= -period / 2.0 {
                d += period;
            }
            acc += d;
        }
        out.push(acc);
    }
    out
}

fn star_vertices(c: [f64; 2], r: f64, rot: f64) -> [[f64; 2]; 10] {
    // inner vertices of a regular pentagram
    let inner_r = r * (0.4 * PI).cos() / (0.2 * PI).cos();
    let mut v = [[0.0; 2]; 10];
    for (k, out) in v.iter_mut().enumerate() {
        let rad = if k % 2 == 0 { r } else { inner_r };
        let a = rot + FRAC_PI_2 + k as f64 * PI / 5.0;
        *out = [c[0] + rad * a.cos(), c[1] + rad * a.sin()];
    }
    v
}

fn polyline_dist(p: [f64; 2], path: &[[f64; 2]]) -> f64 {
    if path.len() == 1 {
        return (p[0] - path[0][0]).hypot(p[1] - path[0][1]);
    }
    path.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

/// Smallest worst-vertex distance over a grid of star placements.
fn star_fit(paths: &[Vec<[f64; 2]>], r: f64) -> f64 {
    // search around the longest stroke; stray contacts elsewhere only add path
    let len = |p: &Vec<[f64; 2]>| p.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum::<f64>();
    let Some(pts) = paths.iter().max_by(|a, b| len(a).total_cmp(&len(b))) else {
        return f64::INFINITY;
    };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let mid = [(x0 + x1) / 2.0, (y0 + y1) / 2.0];
    let dist = |v: [f64; 2]| paths.iter().map(|p| polyline_dist(v, p)).fold(f64::INFINITY, f64::min);
    let mut best = f64::INFINITY;
    const STEP: f64 = 0.0025;
    const HALF: i32 = 8;
    for i in -HALF..=HALF {
        for j in -HALF..=HALF {
            let c = [mid[0] + i as f64 * STEP, mid[1] + j as f64 * STEP];
            for deg in 0..72 {
                let rot = (deg as f64).to_radians();
                let mut worst: f64 = 0.0;
                for v in star_vertices(c, r, rot) {
                    worst = worst.max(dist(v));
                    if worst >= best {
                        break;
                    }
                }
                best = best.min(worst);
            }
        }
    }
    best
}

impl CheckerSpec {
    /// Every distance, radius and tolerance is positive.
    pub fn validate(&self) -> Result<(), BenchError> {
        use CheckerSpec::*;
        let vals: Vec<f64> = match self {
            Lift { min_gain, .. } => vec![*min_gain],
            Proximity { max_distance, .. } | ProximityAny { max_distance, .. } => vec![*max_distance],
            PushTo { max_distance, table_tolerance, .. } => vec![*max_distance, *table_tolerance],
            Displace { min_distance, table_tolerance, .. } => vec![*min_distance, *table_tolerance],
            EdgeDistance { max_distance, .. } => vec![*max_distance],
            Touch { tolerance, .. } => vec![*tolerance],
            Containment { inner, .. } => inner.map(|i| i.to_vec()).unwrap_or_default(),
            OutOfContainer { table_tolerance, .. } => vec![*table_tolerance],
            Removed { .. } => vec![],
            Wipe { min_path, min_turns, band, .. } => vec![*min_path, *min_turns as f64, *band],
            Shake { min_reversals, min_amplitude, .. } => vec![*min_reversals as f64, *min_amplitude],
            Stir { min_sweep, .. } => vec![*min_sweep],
            Star { circumradius, tolerance, band, .. } => vec![*circumradius, *tolerance, *band],
            Circle { radius, tolerance, max_z, sectors, .. } => vec![*radius, *tolerance, *max_z, *sectors as f64],
            KnockOver { min_displacement, .. } => vec![*min_displacement],
            AlignAxis { tolerance, .. } => vec![*tolerance],
            Rotate { min_rotation, max_lift, .. } => vec![*min_rotation, *max_lift],
            Hang { tolerance, min_clearance, .. } => vec![*tolerance, *min_clearance],
        };
        if vals.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(BenchError::Catalog(format!("non-positive threshold in {self:?}")))
        }
    }

    /// Evaluates the criterion on one attempt's ticks, in tick order.
    pub fn check(&self, ticks: &[TickRecord]) -> bool {
        let Some(first) = ticks.first() else { return false };
        let last = ticks.last().expect("non-empty");
        let name = |r: &ObjectRef| resolve(r, first);
        let series = |n: &str| ticks.iter().filter_map(|t| obj(t, n).copied()).collect::<Vec<_>>();
        let fin = |n: &str| obj(last, n).copied();
        let init = |n: &str| obj(first, n).copied();
        use CheckerSpec::*;
        let verdict = || -> Option<bool> {
            Some(match self {
                Lift { target, min_gain } => {
                    let t = name(target)?;
                    let z0 = init(&t)?.position[2];
                    series(&t).iter().any(|b| b.position[2] - z0 >= min_gain - 1e-9)
                }
                Proximity { target, reference, max_distance } => {
                    let (t, r) = (name(target)?, name(reference)?);
                    footprint_gap(&fin(&t)?, &fin(&r)?) <= *max_distance
                }
                ProximityAny { target, max_distance } => {
                    let t = name(target)?;
                    let tb = fin(&t)?;
                    last.objects
                        .iter()
                        .filter(|(n, _)| **n != t)
                        .any(|(_, b)| footprint_gap(&tb, b) <= *max_distance)
                }
                PushTo { target, reference, max_distance, table_tolerance } => {
                    let (t, r) = (name(target)?, name(reference)?);
                    series(&t).iter().all(|b| on_table(b, *table_tolerance))
                        && footprint_gap(&fin(&t)?, &fin(&r)?) <= *max_distance
                }
                Displace { target, direction, min_distance, keep_on_table, table_tolerance } => {
                    let t = name(target)?;
                    let (a, b) = (init(&t)?, fin(&t)?);
                    let u = direction.unit();
                    let moved = (b.position[0] - a.position[0]) * u[0] + (b.position[1] - a.position[1]) * u[1];
                    moved >= min_distance - 1e-9
                        && (!keep_on_table || series(&t).iter().all(|b| on_table(b, *table_tolerance)))
                }
                EdgeDistance { target, edge, max_distance } => {
                    let b = fin(&name(target)?)?;
                    let c = b.corners_xy();
                    let d = match edge {
                        Direction::Front => c.iter().map(|p| p[1] - WORKSPACE.y[0]).fold(f64::MAX, f64::min),
                        Direction::Back => c.iter().map(|p| WORKSPACE.y[1] - p[1]).fold(f64::MAX, f64::min),
                        Direction::Left => c.iter().map(|p| p[0] - WORKSPACE.x[0]).fold(f64::MAX, f64::min),
                        Direction::Right => c.iter().map(|p| WORKSPACE.x[1] - p[0]).fold(f64::MAX, f64::min),
                    };
                    d.max(0.0) <= *max_distance
                }
                Touch { tool, target, tolerance } => {
                    let (a, b) = (name(tool)?, name(target)?);
                    ticks.iter().any(|t| match (obj(t, &a), obj(t, &b)) {
                        (Some(x), Some(y)) => footprint_gap(x, y) <= *tolerance && z_overlap(x, y) > -tolerance,
                        _ => false,
                    })
                }
                Containment { target, container, inner } => {
                    let (t, c) = (fin(&name(target)?)?, fin(&name(container)?)?);
                    let region = match inner {
                        Some([w, l]) => BBox3D { dimensions: [*w, *l, c.dimensions[2]], ..c },
                        None => c,
                    };
                    region.contains_xy(t.position[0], t.position[1], 0.0) && t.position[2] < c.top()
                }
                OutOfContainer { target, container, table_tolerance } => {
                    let (t, c) = (fin(&name(target)?)?, fin(&name(container)?)?);
                    !c.contains_xy(t.position[0], t.position[1], 0.0) && on_table(&t, *table_tolerance)
                }
                Removed { target, from } => {
                    let (t, f) = (fin(&name(target)?)?, fin(&name(from)?)?);
                    xy_penetration(&t, &f) <= 0.0
                }
                Wipe { tool, surface, min_path, min_turns, band, avoid } => {
                    let tl = name(tool)?;
                    let surf = match surface {
                        Some(s) => Some(name(s)?),
                        None => None,
                    };
                    let avoid: Vec<String> = avoid.iter().map(name).collect::<Option<_>>()?;
                    let touches_avoided = ticks.iter().any(|t| {
                        let Some(b) = obj(t, &tl) else { return false };
                        avoid.iter().any(|a| {
                            obj(t, a).is_some_and(|o| xy_penetration(b, o) > 0.0 && b.bottom() < o.top() + band)
                        })
                    });
                    if touches_avoided {
                        return Some(false);
                    }
                    let contact = |i: usize| {
                        let Some(b) = obj(&ticks[i], &tl) else { return false };
                        match &surf {
                            None => b.bottom() <= *band,
                            Some(s) => obj(&ticks[i], s).is_some_and(|o| {
                                (b.bottom() - o.top()).abs() <= *band && o.contains_xy(b.position[0], b.position[1], 0.0)
                            }),
                        }
                    };
                    runs(ticks.len(), contact).into_iter().any(|r| {
                        let pts: Vec<[f64; 2]> = ticks[r]
                            .iter()
                            .filter_map(|t| obj(t, &tl).map(|b| [b.position[0], b.position[1]]))
                            .collect();
                        let (len, turns) = path_stats(&pts, STROKE_AMPLITUDE);
                        len >= *min_path && turns >= *min_turns
                    })
                }
                Shake { target, min_reversals, min_amplitude } => {
                    let s = series(&name(target)?);
                    (0..3).any(|k| reversals(s.iter().map(|b| b.position[k]), *min_amplitude) >= *min_reversals)
                }
                Stir { tool, container, min_sweep } => {
                    let (tl, c) = (name(tool)?, name(container)?);
                    let inside = |i: usize| match (obj(&ticks[i], &tl), obj(&ticks[i], &c)) {
                        (Some(b), Some(m)) => m.contains_xy(b.position[0], b.position[1], 0.0) && b.bottom() < m.top(),
                        _ => false,
                    };
                    runs(ticks.len(), inside).into_iter().any(|r| {
                        let mut sweep = 0.0;
                        let mut prev: Option<f64> = None;
                        for t in &ticks[r] {
                            let (b, m) = (obj(t, &tl).unwrap(), obj(t, &c).unwrap());
                            let (dx, dy) = (b.position[0] - m.position[0], b.position[1] - m.position[1]);
                            if dx.hypot(dy) < 0.003 {
                                prev = None;
                                continue;
                            }
                            let a = dy.atan2(dx);
                            if let Some(p) = prev {
                                let mut d = (a - p) % TAU;
                                if d > PI {
                                    d -= TAU;
                                } else if d <= -PI {
                                    d += TAU;
                                }
                                sweep += d;
                            }
                            prev = Some(a);
                        }
                        sweep.abs() >= *min_sweep
                    })
                }
                Star { tool, circumradius, tolerance, band } => {
                    let tl = name(tool)?;
                    let contact = |i: usize| {
                        !ticks[i].gripper_open && obj(&ticks[i], &tl).is_some_and(|b| b.bottom() <= *band)
                    };
                    let paths: Vec<Vec<[f64; 2]>> = runs(ticks.len(), contact)
                        .into_iter()
                        .map(|r| {
                            ticks[r]
                                .iter()
                                .map(|t| {
                                    let b = obj(t, &tl).unwrap();
                                    [b.position[0], b.position[1]]
                                })
                                .collect()
                        })
                        .collect();
                    star_fit(&paths, *circumradius) <= *tolerance
                }
                Circle { center, radius, tolerance, max_z, sectors } => {
                    let pts: Vec<[f64; 2]> = ticks
                        .iter()
                        .filter(|t| !t.gripper_open && t.gripper[2] <= *max_z)
                        .map(|t| [t.gripper[0] - center[0], t.gripper[1] - center[1]])
                        .collect();
                    let on_circle = pts.iter().all(|p| (p[0].hypot(p[1]) - radius).abs() <= *tolerance);
                    let mut hit = vec![false; *sectors];
                    for p in &pts {
                        let a = p[1].atan2(p[0]).rem_euclid(TAU);
                        hit[((a / TAU * *sectors as f64) as usize).min(sectors - 1)] = true;
                    }
                    !pts.is_empty() && on_circle && hit.iter().all(|h| *h)
                }
                KnockOver { target, min_displacement } => {
                    let t = name(target)?;
                    let mut total = 0.0;
                    for w in ticks.windows(2) {
                        let (Some(a), Some(b)) = (obj(&w[0], &t), obj(&w[1], &t)) else { continue };
                        if w[1].gripper[2] >= b.position[2] && on_table(b, default_table_tol()) {
                            total += xy_dist(a.position, b.position);
                        }
                    }
                    total >= *min_displacement
                }
                AlignAxis { target, axis, tolerance } => {
                    let b = fin(&name(target)?)?;
                    // orientation is the direction of the short side
                    let want = match axis {
                        Axis::Y => 0.0,
                        Axis::X => FRAC_PI_2,
                    };
                    fold_half_turn(b.orientation - want).abs() <= *tolerance
                }
                Rotate { target, min_rotation, spin, max_lift } => {
                    let s = series(&name(target)?);
                    let z0 = s.first()?.position[2];
                    if s.iter().any(|b| b.position[2] - z0 > *max_lift) {
                        return Some(false);
                    }
                    let net = *unwrapped_rotation(&s).last()?;
                    match spin {
                        Spin::Ccw => net >= *min_rotation,
                        Spin::Cw => -net >= *min_rotation,
                        Spin::Any => net.abs() >= *min_rotation,
                    }
                }
                Hang { target, rack, tolerance, min_clearance } => {
                    let (t, r) = (fin(&name(target)?)?, fin(&name(rack)?)?);
                    t.bottom() >= *min_clearance
                        && r.contains_xy(t.position[0], t.position[1], 0.0)
                        && (t.bottom() - r.top()).abs() <= *tolerance
                }
            })
        };
        verdict().unwrap_or(false)
    }

    /// Evaluates the criterion on the last attempt recorded in a log.
    pub fn check_log(&self, log_bytes: &[u8]) -> Result<bool, BenchError> {
        let log = EpisodeLog::from_jsonl(log_bytes)?;
        Ok(self.check(&log.final_attempt_ticks()))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn tick(i: u64, gripper: [f64; 4], open: bool, objects: &[(&str, BBox3D)]) -> TickRecord {
        TickRecord {
            attempt: 1,
            tick: i,
            gripper,
            gripper_open: open,
            objects: objects.iter().map(|(n, b)| (n.to_string(), *b)).collect::<BTreeMap<_, _>>(),
        }
    }

    fn apple_at(x: f64, y: f64, z: f64) -> BBox3D {
        BBox3D::canonical([x, y, z], 0.0, 0.07, 0.07, 0.07)
    }

    fn lift() -> CheckerSpec {
        CheckerSpec::Lift { target: "apple".into(), min_gain: 0.10 }
    }

    #[test]
    fn lift_series_passes_and_short_lift_fails() {
        let high: Vec<TickRecord> = (0..=15)
            .map(|k| tick(k, [0.0; 4], false, &[("apple", apple_at(0.1, 0.4, 0.037 + 0.01 * k as f64))]))
            .collect();
        assert!((high.last().unwrap().objects["apple"].position[2] - 0.187).abs() < 1e-12);
        assert!(lift().check(&high));
        let low: Vec<TickRecord> = (0..=5)
            .map(|k| tick(k, [0.0; 4], false, &[("apple", apple_at(0.1, 0.4, 0.037 + 0.01 * k as f64))]))
            .collect();
        assert!(!lift().check(&low));
    }

    fn circle_spec() -> CheckerSpec {
        CheckerSpec::Circle { center: [0.0, 0.3], radius: 0.05, tolerance: 0.015, max_z: 0.01, sectors: 12 }
    }

    fn circle_path(cx: f64, cy: f64, r: f64) -> Vec<TickRecord> {
        (0..=72)
            .map(|k| {
                let a = k as f64 / 72.0 * TAU;
                tick(k, [cx + r * a.cos(), cy + r * a.sin(), 0.005, 0.0], false, &[])
            })
            .collect()
    }

    #[test]
    fn exact_circle_passes_wider_circle_fails() {
        assert!(circle_spec().check(&circle_path(0.0, 0.3, 0.05)));
        assert!(!circle_spec().check(&circle_path(0.0, 0.3, 0.08)));
    }

    #[test]
    fn circle_ignores_open_or_raised_samples() {
        let mut ticks = circle_path(0.0, 0.3, 0.05);
        ticks.push(tick(99, [0.3, 0.6, 0.2, 0.0], false, &[]));
        ticks.push(tick(100, [0.3, 0.6, 0.0, 0.0], true, &[]));
        assert!(circle_spec().check(&ticks));
        // an arc leaves sectors unvisited
        let arc: Vec<TickRecord> = circle_path(0.0, 0.3, 0.05).into_iter().take(40).collect();
        assert!(!circle_spec().check(&arc));
    }

    fn pen(x: f64, y: f64, bottom: f64) -> BBox3D {
        BBox3D::canonical([x, y, bottom + 0.07], 0.0, 0.015, 0.015, 0.14)
    }

    fn trace(points: &[[f64; 2]]) -> Vec<TickRecord> {
        let mut out = Vec::new();
        for w in points.windows(2) {
            for k in 0..10 {
                let t = k as f64 / 10.0;
                let p = [w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])];
                out.push(tick(out.len() as u64, [p[0], p[1], 0.1, 0.0], false, &[("pen", pen(p[0], p[1], 0.002))]));
            }
        }
        out
    }

    fn star_spec() -> CheckerSpec {
        CheckerSpec::Star { tool: "pen".into(), circumradius: 0.05, tolerance: 0.015, band: 0.005 }
    }

    #[test]
    fn rotated_star_passes() {
        let v = star_vertices([0.1, 0.45], 0.05, 0.3);
        let pts: Vec<[f64; 2]> = (0..=10).map(|k| v[k % 10]).collect();
        assert!(star_spec().check(&trace(&pts)));
    }

    #[test]
    fn pentagon_and_small_star_fail() {
        let v = star_vertices([0.1, 0.45], 0.05, 0.0);
        let pentagon: Vec<[f64; 2]> = (0..=5).map(|k| v[(2 * k) % 10]).collect();
        assert!(!star_spec().check(&trace(&pentagon)));
        let small = star_vertices([0.1, 0.45], 0.025, 0.0);
        let pts: Vec<[f64; 2]> = (0..=10).map(|k| small[k % 10]).collect();
        assert!(!star_spec().check(&trace(&pts)));
    }

    #[test]
    fn star_inner_radius_matches_pentagram_construction() {
        // inner vertices lie where the chords joining alternate outer vertices cross
        let v = star_vertices([0.0, 0.0], 1.0, 0.0);
        let (a, b, c, d) = (v[0], v[4], v[2], v[8]);
        let den = (a[0] - b[0]) * (c[1] - d[1]) - (a[1] - b[1]) * (c[0] - d[0]);
        let t = ((a[0] - c[0]) * (c[1] - d[1]) - (a[1] - c[1]) * (c[0] - d[0])) / den;
        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        assert!((x[0] - v[1][0]).abs() < 1e-9 && (x[1] - v[1][1]).abs() < 1e-9);
    }

    #[test]
    fn footprint_gap_of_aligned_boxes() {
        let a = BBox3D::canonical([0.0, 0.0, 0.05], 0.0, 0.1, 0.1, 0.1);
        let b = BBox3D::canonical([0.17, 0.0, 0.05], 0.0, 0.1, 0.1, 0.1);
        assert!((footprint_gap(&a, &b) - 0.07).abs() < 1e-12);
        let c = BBox3D::canonical([0.13, 0.14, 0.05], 0.0, 0.1, 0.1, 0.1);
        assert!((footprint_gap(&a, &c) - 0.05).abs() < 1e-12);
        assert_eq!(footprint_gap(&a, &a), 0.0);
    }

    #[test]
    fn reversal_counting() {
        let wave = (0..200).map(|k| 0.05 * (k as f64 / 200.0 * 3.0 * TAU).sin());
        // three periods: three peaks and three troughs after the opening rise,
        // and the closing rise from the last trough
        assert_eq!(reversals(wave, 0.03), 6);
        let small = (0..200).map(|k| 0.01 * (k as f64 / 200.0 * 3.0 * TAU).sin());
        assert_eq!(reversals(small, 0.03), 0);
    }

    #[test]
    fn boustrophedon_counts_strokes() {
        let mut pts = Vec::new();
        for row in 0..4 {
            let xs: Vec<f64> = (0..=10).map(|k| k as f64 * 0.01).collect();
            let y = row as f64 * 0.03;
            if row % 2 == 0 {
                pts.extend(xs.iter().map(|x| [*x, y]));
            } else {
                pts.extend(xs.iter().rev().map(|x| [*x, y]));
            }
        }
        let (len, turns) = path_stats(&pts, STROKE_AMPLITUDE);
        assert_eq!(turns, 3);
        assert!((len - (0.4 + 3.0 * 0.03)).abs() < 1e-9);
    }

    #[test]
    fn rotation_unwraps_past_fold() {
        let cap = |yaw: f64| BBox3D::canonical([0.0, 0.4, 0.2], yaw, 0.03, 0.03, 0.02);
        let s: Vec<BBox3D> = (0..=40).map(|k| cap(k as f64 * 0.05)).collect();
        assert!((unwrapped_rotation(&s).last().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_threshold_is_rejected() {
        assert!(CheckerSpec::Lift { target: "a".into(), min_gain: -0.1 }.validate().is_err());
        assert!(circle_spec().validate().is_ok());
    }

    #[test]
    fn missing_object_is_failure() {
        let ticks = vec![tick(0, [0.0; 4], true, &[("pear", apple_at(0.0, 0.4, 0.035))])];
        assert!(!lift().check(&ticks));
        assert!(!lift().check(&[]));
    }
}
