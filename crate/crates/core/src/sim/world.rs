use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::collision::{penetration, push_distance, xy_penetration};
use super::scene::{SceneObject, TaskScene, WORKSPACE};
use super::tracks::{build_tracks, ObjectTracks, Snapshot, TickKind, TRACK_SAMPLE_CAP};
use super::SimError;
use crate::geometry::{densify, BBox3D, Pose, Step, Trajectory};

pub const HOME_POSE: Pose = Pose {
    x: 0.0,
    y: 0.3,
    z: 0.4,
    yaw: 0.0,
};

/// Maximum horizontal offset between gripper and grasp point.
pub const GRASP_XY_TOL: f64 = 0.02;
/// Maximum vertical offset between gripper and grasp point.
pub const GRASP_Z_TOL: f64 = 0.04;
/// Finger stroke of the modelled two-finger gripper.
pub const MAX_GRASP_WIDTH: f64 = 0.085;
/// Interpenetration below this depth is not reported.
pub const COLLISION_TOL: f64 = 0.001;

pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

const FINGER_THICKNESS: f64 = 0.01;
const FINGER_DEPTH: f64 = 0.02;
const FINGER_LENGTH: f64 = 0.05;
const PALM_HEIGHT: f64 = 0.05;
const PALM_DEPTH: f64 = 0.04;
// released objects snap onto supports at most this far above their bottom face
const SETTLE_TOL: f64 = 0.02;
const NOISE_STREAM: u64 = 0x6e6f_6973_6521;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub object: String,
    /// Object pose expressed in the gripper frame.
    pub relative: Pose,
    /// Finger separation while holding the object.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub objects: Vec<SceneObject>,
    pub gripper: Pose,
    pub gripper_open: bool,
    pub attached: Option<Attachment>,
    pub tick: u64,
}

impl SimState {
    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub tick: u64,
    pub mover: String,
    pub object: String,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceViolation {
    pub tick: u64,
    pub requested: Pose,
    pub clamped: Pose,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub violation: Option<WorkspaceViolation>,
    pub collisions: Vec<Collision>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub moves: usize,
    pub violations: usize,
    pub collisions: usize,
}

/// One episode's kinematic tabletop world and its recorded history.
#[derive(Debug, Clone)]
pub struct Simulator {
    scene: TaskScene,
    seed: u64,
    state: SimState,
    history: Vec<Snapshot>,
    collisions: Vec<Collision>,
    violations: Vec<WorkspaceViolation>,
    detected: BTreeSet<String>,
    noise_rng: ChaCha8Rng,
}

fn sample(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..=range[1])
    } else {
        range[0]
    }
}

fn rest_height(child: &SceneObject, parent: &SceneObject) -> f64 {
    let h = child.height() / 2.0;
    if let Some((region, floor)) = parent.receptacle_region() {
        if region.contains_xy(child.pose.x, child.pose.y, 0.0) {
            return floor + h;
        }
    }
    parent.bbox().top() + h
}

fn place_objects(scene: &TaskScene, rng: &mut ChaCha8Rng) -> Option<Vec<SceneObject>> {
    let mut placed: Vec<SceneObject> = Vec::with_capacity(scene.objects.len());
    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    for template in &scene.objects {
        let mut obj = template.clone();
        match scene.randomization.get(&obj.name) {
            None => {
                obj.pose = Pose::new(
                    template.pose.x,
                    template.pose.y,
                    template.height() / 2.0,
                    template.pose.yaw,
                );
            }
            Some(pl) => {
                let (x, y, yaw) = (sample(rng, pl.x), sample(rng, pl.y), sample(rng, pl.yaw));
                match &pl.relative_to {
                    None => obj.pose = Pose::new(x, y, obj.height() / 2.0, yaw),
                    Some(parent_name) => {
                        let parent = placed.iter().find(|o| &o.name == parent_name)?;
                        let p = parent.pose.compose(&Pose::new(x, y, 0.0, yaw));
                        obj.pose = Pose::new(p.x, p.y, 0.0, p.yaw);
                        obj.pose.z = rest_height(&obj, parent);
                        parent_of.insert(template.name.as_str(), parent_name.as_str());
                    }
                }
            }
        }
        placed.push(obj);
    }
    let related = |a: &str, b: &str| {
        let root = |name: &str| {
            let mut n = name.to_string();
            while let Some(p) = parent_of.get(n.as_str()) {
                n = p.to_string();
            }
            n
        };
        root(a) == root(b)
    };
    for i in 0..placed.len() {
        for j in (i + 1)..placed.len() {
            if related(&placed[i].name, &placed[j].name) {
                continue;
            }
            if xy_penetration(&placed[i].bbox(), &placed[j].bbox()) > 0.0 {
                return None;
            }
        }
    }
    Some(placed)
}

fn tokens(text: &str) -> Vec<String> {
    const STOP: &[&str] = &[
        "the", "a", "an", "of", "on", "in", "to", "at", "which", "is", "that", "from", "with",
        "and", "its", "object",
    ];
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let t = t.to_lowercase();
            if t.len() > 3 && t.ends_with('s') && !t.ends_with("ss") {
                t[..t.len() - 1].to_string()
            } else {
                t
            }
        })
        .filter(|t| !STOP.contains(&t.as_str()))
        .collect()
}

enum Spatial {
    MinX,
    MaxX,
    MedianX,
    MinY,
    MaxY,
}

fn spatial_hint(query: &[String]) -> Option<Spatial> {
    query.iter().find_map(|t| match t.as_str() {
        "left" | "leftmost" => Some(Spatial::MinX),
        "right" | "rightmost" => Some(Spatial::MaxX),
        "middle" | "center" | "centre" | "central" => Some(Spatial::MedianX),
        "front" | "nearest" | "closest" | "near" | "bottom" => Some(Spatial::MinY),
        "back" | "far" | "farthest" | "furthest" | "top" => Some(Spatial::MaxY),
        _ => None,
    })
}

impl Simulator {
    /// Places the scene's objects for `seed` and puts the gripper at home, open.
    pub fn reset(scene: &TaskScene, seed: u64) -> Result<Self, SimError> {
        scene.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut objects = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            if let Some(placed) = place_objects(scene, &mut rng) {
                objects = Some(placed);
                break;
            }
        }
        let objects = objects.ok_or_else(|| SimError::PlacementInfeasible {
            task: scene.id.clone(),
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        let mut sim = Self {
            scene: scene.clone(),
            seed,
            state: SimState {
                objects,
                gripper: HOME_POSE,
                gripper_open: true,
                attached: None,
                tick: 0,
            },
            history: Vec::new(),
            collisions: Vec::new(),
            violations: Vec::new(),
            detected: BTreeSet::new(),
            noise_rng: ChaCha8Rng::seed_from_u64(seed ^ NOISE_STREAM),
        };
        sim.record(TickKind::Reset);
        Ok(sim)
    }

    pub fn scene(&self) -> &TaskScene {
        &self.scene
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn history(&self) -> &[Snapshot] {
        &self.history
    }

    pub fn collisions(&self) -> &[Collision] {
        &self.collisions
    }

    pub fn violations(&self) -> &[WorkspaceViolation] {
        &self.violations
    }

    pub fn detected(&self) -> &BTreeSet<String> {
        &self.detected
    }

    fn record(&mut self, kind: TickKind) {
        let objects = self
            .state
            .objects
            .iter()
            .map(|o| (o.name.clone(), o.bbox()))
            .collect();
        self.history.push(Snapshot {
            tick: self.state.tick,
            kind,
            gripper: self.state.gripper,
            gripper_open: self.state.gripper_open,
            objects,
        });
    }

    fn attached_index(&self) -> Option<usize> {
        let att = self.state.attached.as_ref()?;
        self.state.objects.iter().position(|o| o.name == att.object)
    }

    fn finger_gap(&self) -> f64 {
        if self.state.gripper_open {
            MAX_GRASP_WIDTH
        } else {
            self.state.attached.as_ref().map_or(0.0, |a| a.width)
        }
    }

    /// Collision geometry of the hand: two fingers below a palm.
    pub fn gripper_boxes(&self) -> [BBox3D; 3] {
        let g = self.state.gripper;
        let (s, c) = g.yaw.sin_cos();
        let offset = self.finger_gap() / 2.0 + FINGER_THICKNESS / 2.0;
        let finger = |sign: f64| {
            BBox3D::canonical(
                [
                    g.x + sign * offset * c,
                    g.y + sign * offset * s,
                    g.z + FINGER_LENGTH / 2.0,
                ],
                g.yaw,
                FINGER_THICKNESS,
                FINGER_DEPTH,
                FINGER_LENGTH,
            )
        };
        let palm = BBox3D::canonical(
            [g.x, g.y, g.z + FINGER_LENGTH + PALM_HEIGHT / 2.0],
            g.yaw,
            MAX_GRASP_WIDTH + 2.0 * FINGER_THICKNESS,
            PALM_DEPTH,
            PALM_HEIGHT,
        );
        [finger(1.0), finger(-1.0), palm]
    }

    /// Moves the gripper to `target` in one tick, carrying any held object and
    /// pushing movable objects it sweeps into.
    ///
    /// Targets outside the workspace are clamped and the violation recorded.
    pub fn step_to(&mut self, target: Pose) -> StepReport {
        let clamped = WORKSPACE.clamp(&target);
        let tick = self.state.tick + 1;
        let violation = (clamped != target).then_some(WorkspaceViolation {
            tick,
            requested: target,
            clamped,
        });
        if let Some(v) = &violation {
            self.violations.push(v.clone());
        }
        let prev = self.state.gripper;
        self.state.gripper = clamped;
        if let Some(i) = self.attached_index() {
            let rel = self.state.attached.as_ref().map(|a| a.relative).unwrap_or(clamped);
            self.state.objects[i].pose = clamped.compose(&rel);
        }
        self.state.tick = tick;
        let collisions = self.resolve_contacts(prev);
        self.collisions.extend(collisions.iter().cloned());
        self.record(TickKind::Move);
        StepReport {
            violation,
            collisions,
        }
    }

    fn inside_receptacle(inner: &BBox3D, host: &SceneObject) -> bool {
        match host.receptacle_region() {
            Some((region, floor)) => {
                region.contains_xy(inner.position[0], inner.position[1], 0.0)
                    && inner.bottom() >= floor - COLLISION_TOL
            }
            None => false,
        }
    }

    fn resolve_contacts(&mut self, prev: Pose) -> Vec<Collision> {
        let g = self.state.gripper;
        let (dx, dy) = (g.x - prev.x, g.y - prev.y);
        let travel = dx.hypot(dy);
        let dir = (travel > 1e-12).then(|| [dx / travel, dy / travel]);
        let carried = self.attached_index();

        let mut movers: Vec<(String, BBox3D, Option<usize>)> = self
            .gripper_boxes()
            .into_iter()
            .map(|b| ("gripper".to_string(), b, None))
            .collect();
        if let Some(i) = carried {
            let obj = &self.state.objects[i];
            movers.push((obj.name.clone(), obj.bbox(), Some(i)));
        }

        let tick = self.state.tick;
        let mut out = Vec::new();
        for j in 0..self.state.objects.len() {
            if Some(j) == carried {
                continue;
            }
            let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
            let mut push: f64 = 0.0;
            let target_box = self.state.objects[j].bbox();
            for (label, mbox, mover_idx) in &movers {
                let depth = penetration(mbox, &target_box);
                if depth <= COLLISION_TOL {
                    continue;
                }
                let target = &self.state.objects[j];
                if Self::inside_receptacle(mbox, target) {
                    continue;
                }
                if let Some(i) = mover_idx {
                    if Self::inside_receptacle(&target_box, &self.state.objects[*i]) {
                        continue;
                    }
                }
                let e = worst.entry(label.as_str()).or_insert(0.0);
                *e = e.max(depth);
                if let (true, Some(d)) = (target.movable, dir) {
                    push = push.max(push_distance(mbox, &target_box, d));
                }
            }
            let name = self.state.objects[j].name.clone();
            for (label, depth) in worst {
                out.push(Collision {
                    tick,
                    mover: label.to_string(),
                    object: name.clone(),
                    depth,
                });
            }
            if let (true, Some(d)) = (push > 0.0, dir) {
                // contact can move an object no further than the hand travelled
                let push = push.min(travel);
                let obj = &mut self.state.objects[j];
                obj.pose.x += d[0] * push;
                obj.pose.y += d[1] * push;
            }
        }
        if let Some(i) = carried {
            let obj = &self.state.objects[i];
            let bottom = obj.bbox().bottom();
            if bottom < -COLLISION_TOL {
                out.push(Collision {
                    tick,
                    mover: obj.name.clone(),
                    object: "table".into(),
                    depth: -bottom,
                });
            }
        }
        out
    }

    /// Opens or closes the gripper; one tick.
    ///
    /// Closing attaches the nearest graspable body or part whose centre lies
    /// within the grasp tolerances and whose width across the fingers fits the
    /// stroke. Opening releases the held object, which settles onto the table,
    /// the object below it, or the floor of a receptacle it sits over.
    /// Returns the name of the object attached or released, if any.
    pub fn set_gripper(&mut self, open: bool) -> Option<String> {
        let mut changed = None;
        if open {
            if let Some(i) = self.attached_index() {
                self.state.attached = None;
                self.settle(i);
                changed = Some(self.state.objects[i].name.clone());
            }
            self.state.attached = None;
            self.state.gripper_open = true;
        } else if self.state.gripper_open {
            self.state.gripper_open = false;
            if let Some((i, width)) = self.grasp_candidate() {
                let obj = &self.state.objects[i];
                self.state.attached = Some(Attachment {
                    object: obj.name.clone(),
                    relative: self.state.gripper.relative(&obj.pose),
                    width,
                });
                changed = Some(obj.name.clone());
            }
        }
        self.state.tick += 1;
        self.record(TickKind::Gripper);
        changed
    }

    fn grasp_candidate(&self) -> Option<(usize, f64)> {
        let g = self.state.gripper;
        let mut best: Option<(f64, usize, f64)> = None;
        for (i, obj) in self.state.objects.iter().enumerate() {
            if !obj.graspable {
                continue;
            }
            let mut options: Vec<(BBox3D, f64)> = obj
                .parts
                .iter()
                .map(|p| {
                    let b = obj.part_bbox(p);
                    (b, b.width_along(g.yaw))
                })
                .collect();
            options.push((obj.bbox(), obj.width_along(g.yaw)));
            for (b, width) in options {
                let [cx, cy, cz] = b.position;
                let dxy = (cx - g.x).hypot(cy - g.y);
                let dz = (cz - g.z).abs();
                if dxy > GRASP_XY_TOL || dz > GRASP_Z_TOL || width > MAX_GRASP_WIDTH {
                    continue;
                }
                let d = dxy.hypot(dz);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, width));
                }
            }
        }
        best.map(|(_, i, w)| (i, w))
    }

    fn settle(&mut self, i: usize) {
        let b = self.state.objects[i].bbox();
        let (cx, cy, bottom) = (b.position[0], b.position[1], b.bottom());
        let mut support: f64 = 0.0;
        for (j, other) in self.state.objects.iter().enumerate() {
            if j == i {
                continue;
            }
            if let Some((region, floor)) = other.receptacle_region() {
                if region.contains_xy(cx, cy, 0.0) && floor <= bottom + SETTLE_TOL {
                    support = support.max(floor);
                    continue;
                }
            }
            let ob = other.bbox();
            if ob.contains_xy(cx, cy, 0.0) && ob.top() <= bottom + SETTLE_TOL {
                support = support.max(ob.top());
            }
        }
        let obj = &mut self.state.objects[i];
        obj.pose.z = support + obj.height() / 2.0;
    }

    /// Detection oracle: resolves a free-text query to an object or an
    /// `"<object> <part>"` phrase by token overlap and returns its box with
    /// optional Gaussian noise on position and dimensions.
    pub fn detect_object(&mut self, query: &str, noise_sigma: f64) -> Result<BBox3D, SimError> {
        let q = tokens(query);
        let mut scored: Vec<(usize, usize, Option<usize>)> = Vec::new();
        let mut best = (0usize, usize::MAX);
        for (i, obj) in self.state.objects.iter().enumerate() {
            let base = tokens(&obj.name);
            let mut cands = vec![(base.clone(), None)];
            for (k, part) in obj.parts.iter().enumerate() {
                let mut t = base.clone();
                t.extend(tokens(&part.name));
                cands.push((t, Some(k)));
            }
            for (toks, part) in cands {
                let score = q.iter().filter(|t| toks.contains(t)).count();
                if score == 0 {
                    continue;
                }
                let extra = toks.iter().filter(|t| !q.contains(t)).count();
                if score > best.0 || (score == best.0 && extra < best.1) {
                    best = (score, extra);
                    scored.clear();
                }
                if (score, extra) == best {
                    scored.push((i, extra, part));
                }
            }
        }
        if scored.is_empty() {
            return Err(SimError::ObjectNotFound(query.to_string()));
        }
        let pick = if scored.len() == 1 {
            scored[0]
        } else {
            let xs = |c: &(usize, usize, Option<usize>)| self.state.objects[c.0].pose.x;
            let ys = |c: &(usize, usize, Option<usize>)| self.state.objects[c.0].pose.y;
            match spatial_hint(&q) {
                None => scored[0],
                Some(Spatial::MinX) => *scored.iter().min_by(|a, b| xs(a).total_cmp(&xs(b))).unwrap(),
                Some(Spatial::MaxX) => *scored.iter().max_by(|a, b| xs(a).total_cmp(&xs(b))).unwrap(),
                Some(Spatial::MinY) => *scored.iter().min_by(|a, b| ys(a).total_cmp(&ys(b))).unwrap(),
                Some(Spatial::MaxY) => *scored.iter().max_by(|a, b| ys(a).total_cmp(&ys(b))).unwrap(),
                Some(Spatial::MedianX) => {
                    let mut sorted = scored.clone();
                    sorted.sort_by(|a, b| xs(a).total_cmp(&xs(b)));
                    sorted[sorted.len() / 2]
                }
            }
        };
        let obj = &self.state.objects[pick.0];
        let mut b = match pick.2 {
            Some(k) => obj.part_bbox(&obj.parts[k]),
            None => obj.bbox(),
        };
        self.detected.insert(obj.name.clone());
        if noise_sigma > 0.0 {
            let normal = Normal::new(0.0, noise_sigma)
                .map_err(|e| SimError::InvalidScene(format!("noise sigma: {e}")))?;
            for v in b.position.iter_mut() {
                *v += normal.sample(&mut self.noise_rng);
            }
            for d in b.dimensions.iter_mut() {
                *d = (*d + normal.sample(&mut self.noise_rng)).max(0.001);
            }
        }
        Ok(b)
    }

    /// Tracks of every object detected during the episode (all objects if
    /// none was), at most [`TRACK_SAMPLE_CAP`] samples each.
    pub fn tracks(&self) -> ObjectTracks {
        let names: Vec<&str> = if self.detected.is_empty() {
            self.state.objects.iter().map(|o| o.name.as_str()).collect()
        } else {
            self.detected.iter().map(String::as_str).collect()
        };
        build_tracks(&self.history, names, TRACK_SAMPLE_CAP)
    }

    /// Densifies and executes a trajectory. Binary-mode waypoints change the
    /// gripper after arriving at their pose.
    pub fn execute(&mut self, trajectory: &Trajectory, pos_step: f64, yaw_step: f64) -> ExecutionReport {
        let dense = densify(trajectory, pos_step, yaw_step);
        let mut report = ExecutionReport::default();
        for step in &dense.steps {
            match *step {
                Step::Move(p) => {
                    let r = self.step_to(p);
                    report.moves += 1;
                    report.violations += usize::from(r.violation.is_some());
                    report.collisions += r.collisions.len();
                }
                Step::Gripper(cmd) => {
                    self.set_gripper(!cmd.is_close());
                }
                Step::MoveThen(p, cmd) => {
                    let r = self.step_to(p);
                    report.moves += 1;
                    report.violations += usize::from(r.violation.is_some());
                    report.collisions += r.collisions.len();
                    if self.state.gripper_open == cmd.is_close() {
                        self.set_gripper(!cmd.is_close());
                    }
                }
            }
        }
        report
    }
}
