//! Hand-written expert motions for every task, used to produce calibration
//! logs (one passing and one failing episode per task) and scripted fixtures.
//! They read ground-truth poses from the simulator.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::checker::{ObjectRef, Rank};
use super::{BenchError, CheckerSpec, Task};
use crate::geometry::{BBox3D, GripperCommand, Pose, Step, Trajectory, DEFAULT_POS_STEP, DEFAULT_YAW_STEP};
use crate::chat::{Role, ScriptedBackend};
use crate::orchestrator::{EpisodeLog, EpisodeRecord, TickRecord};
use crate::parser::{format_trajectory, OutputMode};
use crate::prompt::{render_verdict, VERDICT_PREFIX};
use crate::sim::{SceneObject, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoKind {
    Pass,
    Fail,
}

const SAFE: f64 = 0.35;

struct Plan {
    steps: Vec<Step>,
    at: Pose,
}

impl Plan {
    fn new(start: Pose) -> Self {
        Self { steps: vec![Step::Move(start)], at: start }
    }

    fn to(&mut self, x: f64, y: f64, z: f64, yaw: f64) -> &mut Self {
        self.at = Pose::new(x, y, z, yaw);
        self.steps.push(Step::Move(self.at));
        self
    }

    fn z(&mut self, z: f64) -> &mut Self {
        let a = self.at;
        self.to(a.x, a.y, z, a.yaw)
    }

    fn xy(&mut self, x: f64, y: f64) -> &mut Self {
        let a = self.at;
        self.to(x, y, a.z, a.yaw)
    }

    fn yaw(&mut self, yaw: f64) -> &mut Self {
        let a = self.at;
        self.to(a.x, a.y, a.z, yaw)
    }

    fn open(&mut self) -> &mut Self {
        self.steps.push(Step::Gripper(GripperCommand::Open));
        self
    }

    fn close(&mut self) -> &mut Self {
        self.steps.push(Step::Gripper(GripperCommand::Close));
        self
    }

    /// Approach from above, close at `g`, rise to `lift_z`.
    fn grasp(&mut self, g: Grasp, lift_z: f64) -> &mut Self {
        self.z(SAFE).yaw(g.yaw).xy(g.x, g.y).z(g.z).close().z(lift_z)
    }

    /// Carry at the current height to (x, y), lower so the gripper is at `z`, release, retreat.
    fn release_at(&mut self, x: f64, y: f64, z: f64) -> &mut Self {
        self.xy(x, y).z(z).open().z(SAFE)
    }

    fn done(self) -> Trajectory {
        Trajectory::new(self.steps)
    }
}

#[derive(Debug, Clone, Copy)]
struct Grasp {
    x: f64,
    y: f64,
    z: f64,
    yaw: f64,
    /// Object centre height below the gripper.
    drop: f64,
}

fn body_grasp(o: &SceneObject) -> Grasp {
    let b = o.bbox();
    let c = b.position[2];
    let h = b.dimensions[2];
    // keep the palm clear of the top where the tolerance allows
    let z = (c + (h / 2.0 - 0.05 + 0.002).max(0.0)).min(c + 0.035);
    Grasp { x: b.position[0], y: b.position[1], z, yaw: b.orientation, drop: z - c }
}

fn part_grasp(o: &SceneObject, part: &str) -> Grasp {
    let p = o.part(part).expect("demo part exists");
    let b = o.part_bbox(p);
    Grasp {
        x: b.position[0],
        y: b.position[1],
        z: b.position[2],
        yaw: o.pose.yaw + p.yaw,
        drop: 0.0,
    }
}

fn unit(from: [f64; 3], to: [f64; 3]) -> [f64; 2] {
    let (dx, dy) = (to[0] - from[0], to[1] - from[1]);
    let n = dx.hypot(dy).max(1e-12);
    [dx / n, dy / n]
}

struct Scene<'a> {
    sim: &'a Simulator,
}

impl Scene<'_> {
    fn o(&self, name: &str) -> &SceneObject {
        self.sim.state().object(name).expect("demo object exists")
    }

    fn b(&self, name: &str) -> BBox3D {
        self.o(name).bbox()
    }

    fn resolve(&self, r: &ObjectRef) -> String {
        match r {
            ObjectRef::Name(n) => n.clone(),
            ObjectRef::Pick { among, by } => {
                let objs: Vec<&SceneObject> = if among.is_empty() {
                    self.sim.state().objects.iter().collect()
                } else {
                    among.iter().map(|n| self.o(n)).collect()
                };
                let mut sorted = objs.clone();
                sorted.sort_by(|a, b| a.pose.x.total_cmp(&b.pose.x));
                let pick = match by {
                    Rank::MinX => sorted[0],
                    Rank::MaxX => sorted[sorted.len() - 1],
                    Rank::MedianX => sorted[sorted.len() / 2],
                    Rank::Loneliest => {
                        let nearest = |me: &SceneObject| {
                            self.sim
                                .state()
                                .objects
                                .iter()
                                .filter(|o| o.name != me.name)
                                .map(|o| o.pose.xy_distance(&me.pose))
                                .fold(f64::INFINITY, f64::min)
                        };
                        *objs.iter().max_by(|a, b| nearest(a).total_cmp(&nearest(b))).unwrap()
                    }
                };
                pick.name.clone()
            }
        }
    }

    /// Some other object among the candidates of a pick rule.
    fn other(&self, r: &ObjectRef, not: &str) -> String {
        match r {
            ObjectRef::Pick { among, .. } if !among.is_empty() => {
                among.iter().find(|n| *n != not).cloned().unwrap_or_else(|| not.to_string())
            }
            _ => not.to_string(),
        }
    }
}

/// Gripper height that puts the bottom of an object held with `g` at `bottom`.
fn hold_z(g: &Grasp, o: &SceneObject, bottom: f64) -> f64 {
    bottom + o.height() / 2.0 + g.drop
}

fn pick_and_place(p: &mut Plan, o: &SceneObject, x: f64, y: f64, bottom: f64) {
    let g = body_grasp(o);
    p.grasp(g, SAFE);
    p.release_at(x, y, hold_z(&g, o, bottom));
}

/// Pushes with the closed fingers at height `z` so that a box of half-extent
/// `reach` at `from` ends up at `to`.
fn push(p: &mut Plan, from: [f64; 3], to: [f64; 2], reach: f64, z: f64) {
    let u = unit(from, [to[0], to[1], 0.0]);
    let back = reach + 0.01 + 0.03;
    let start = [from[0] - u[0] * back, from[1] - u[1] * back];
    let end = [to[0] - u[0] * (reach + 0.01), to[1] - u[1] * (reach + 0.01)];
    let yaw = u[1].atan2(u[0]);
    p.z(SAFE).close().yaw(yaw).xy(start[0], start[1]).z(z).xy(end[0], end[1]).z(SAFE);
}

fn zigzag(p: &mut Plan, c: [f64; 2], half_w: f64, rows: &[f64], z: f64) {
    for (i, dy) in rows.iter().enumerate() {
        let (a, b) = if i % 2 == 0 { (-half_w, half_w) } else { (half_w, -half_w) };
        if i == 0 {
            p.xy(c[0] + a, c[1] + dy).z(z);
        } else {
            p.xy(c[0] + a, c[1] + dy);
        }
        p.xy(c[0] + b, c[1] + dy);
    }
}

fn circle(p: &mut Plan, c: [f64; 2], r: f64, n: usize, turns: f64) {
    for k in 0..=((n as f64 * turns) as usize) {
        let a = k as f64 / n as f64 * TAU;
        p.xy(c[0] + r * a.cos(), c[1] + r * a.sin());
    }
}

fn star_points(c: [f64; 2], r: f64, with_inner: bool) -> Vec<[f64; 2]> {
    let inner_r = r * (0.4 * PI).cos() / (0.2 * PI).cos();
    let mut out = Vec::new();
    for k in 0..=10 {
        if !with_inner && k % 2 == 1 {
            continue;
        }
        let rad = if k % 2 == 0 { r } else { inner_r };
        let a = FRAC_PI_2 + k as f64 * PI / 5.0;
        out.push([c[0] + rad * a.cos(), c[1] + rad * a.sin()]);
    }
    out
}

/// Carries `name` next to `reference`, on the side it came from, leaving a
/// footprint gap of `gap`. The object's narrow side faces the reference.
fn place_beside(p: &mut Plan, s: &Scene, name: &str, reference: &str, gap: f64) {
    let (o, rb) = (s.o(name), s.b(reference));
    let u = unit(rb.position, o.pose.position());
    let a = u[1].atan2(u[0]);
    let d = rb.width_along(a) / 2.0 + o.bbox().dimensions[0] / 2.0 + gap;
    let g = body_grasp(o);
    p.grasp(g, SAFE).yaw(a);
    p.release_at(rb.position[0] + u[0] * d, rb.position[1] + u[1] * d, hold_z(&g, o, 0.002));
}

/// A resting spot for `o` `gap` beyond the footprint of `reference`, on its side.
fn beside(s: &Scene, o: &str, reference: &str, gap: f64) -> [f64; 2] {
    let (ob, rb) = (s.b(o), s.b(reference));
    let u = unit(rb.position, ob.position);
    let a = u[1].atan2(u[0]);
    let d = rb.width_along(a) / 2.0 + ob.width_along(a) / 2.0 + gap;
    [rb.position[0] + u[0] * d, rb.position[1] + u[1] * d]
}

/// An expert trajectory for `task` from the simulator's current state.
pub fn demo_trajectory(task: &Task, sim: &Simulator, kind: DemoKind) -> Trajectory {
    let s = Scene { sim };
    let pass = kind == DemoKind::Pass;
    let mut p = Plan::new(sim.state().gripper);
    match &task.checker {
        CheckerSpec::Lift { target, .. } => {
            let t = s.resolve(target);
            let other = s.other(target, &t);
            let o = s.o(&t);
            let rim = o.part("rim").is_some();
            let (g, gain) = match (pass, other != t, rim) {
                (true, _, true) => (part_grasp(o, "rim"), 0.2),
                (true, _, false) => (body_grasp(o), 0.2),
                (false, true, _) => (body_grasp(s.o(&other)), 0.2),
                // the centre of a wide body is out of the fingers' reach
                (false, false, true) => (Grasp { x: o.pose.x, y: o.pose.y, ..body_grasp(o) }, 0.2),
                (false, false, false) => (body_grasp(o), 0.05),
            };
            p.grasp(g, g.z + gain);
        }
        CheckerSpec::Proximity { target, reference, .. } => {
            let (t, r) = (s.resolve(target), s.resolve(reference));
            let other = s.other(target, &t);
            let (name, gap) = match (pass, other != t) {
                (true, _) => (t, 0.01),
                (false, true) => (other, 0.01),
                (false, false) => (t, 0.15),
            };
            place_beside(&mut p, &s, &name, &r, gap);
        }
        CheckerSpec::ProximityAny { target, .. } => {
            let t = s.resolve(target);
            let nearest = sim
                .state()
                .objects
                .iter()
                .filter(|o| o.name != t)
                .min_by(|a, b| a.pose.xy_distance(&s.o(&t).pose).total_cmp(&b.pose.xy_distance(&s.o(&t).pose)))
                .map(|o| o.name.clone())
                .expect("other objects");
            place_beside(&mut p, &s, &t, &nearest, if pass { 0.01 } else { 0.15 });
        }
        CheckerSpec::PushTo { target, reference, .. } => {
            let (t, r) = (s.resolve(target), s.resolve(reference));
            if pass {
                let (b, rb) = (s.b(&t), s.b(&r));
                let u = unit(b.position, rb.position);
                let a = u[1].atan2(u[0]);
                let reach = b.width_along(a) / 2.0;
                let d = rb.width_along(a) / 2.0 + reach + 0.01;
                let to = [rb.position[0] - u[0] * d, rb.position[1] - u[1] * d];
                push(&mut p, b.position, to, reach, 0.02);
            } else {
                place_beside(&mut p, &s, &t, &r, 0.01);
            }
        }
        CheckerSpec::Displace { target, direction, .. } => {
            let t = s.resolve(target);
            let o = s.o(&t);
            let b = o.bbox();
            let u = match direction {
                super::Direction::Left => [-1.0, 0.0],
                super::Direction::Right => [1.0, 0.0],
                super::Direction::Front => [0.0, -1.0],
                super::Direction::Back => [0.0, 1.0],
            };
            if task.id() == "move_pan_left" {
                let g = part_grasp(o, "handle");
                let d = if pass { 0.18 } else { 0.05 };
                p.grasp(g, g.z + 0.05).xy(g.x + u[0] * d, g.y + u[1] * d).z(g.z + 0.003).open().z(SAFE);
            } else {
                let to = [b.position[0] + u[0] * 0.15, b.position[1] + u[1] * 0.15];
                if pass {
                    push(&mut p, b.position, to, b.dimensions[0] / 2.0, 0.02);
                } else {
                    pick_and_place(&mut p, o, to[0], to[1], 0.002);
                }
            }
        }
        CheckerSpec::EdgeDistance { target, .. } => {
            let t = s.resolve(target);
            let o = s.o(&t);
            let y = if pass { 0.17 } else { 0.35 };
            pick_and_place(&mut p, o, o.pose.x, y, 0.002);
        }
        CheckerSpec::Touch { tool, target, .. } => {
            let (tl, tg) = (s.resolve(tool), s.resolve(target));
            let o = s.o(&tl);
            let tb = s.b(&tg);
            let g = body_grasp(o);
            let u = unit(o.pose.position(), tb.position);
            let a = u[1].atan2(u[0]);
            // long side forward so the tool leads the fingers
            let reach = tb.width_along(a) / 2.0 + o.bbox().dimensions[1] / 2.0;
            let stand = reach + if pass { -0.005 } else { 0.1 };
            let (x, y) = (tb.position[0] - u[0] * stand, tb.position[1] - u[1] * stand);
            let back = 0.05;
            p.grasp(g, SAFE).yaw(a + FRAC_PI_2);
            p.xy(x - u[0] * back, y - u[1] * back).z(hold_z(&g, o, 0.03)).xy(x, y).z(SAFE);
        }
        CheckerSpec::Containment { target, container, .. } => {
            let (t, c) = (s.resolve(target), s.resolve(container));
            let o = s.o(&t);
            let cb = s.b(&c);
            let g = body_grasp(o);
            if pass {
                p.grasp(g, SAFE).yaw(cb.orientation).xy(cb.position[0], cb.position[1]);
                p.z(hold_z(&g, o, cb.top() + 0.01)).open().z(SAFE);
            } else {
                let [x, y] = beside(&s, &t, &c, 0.05);
                pick_and_place(&mut p, o, x, y, 0.002);
            }
        }
        CheckerSpec::OutOfContainer { target, container, .. } => {
            let (t, c) = (s.resolve(target), s.resolve(container));
            let o = s.o(&t);
            let cb = s.b(&c);
            let g = body_grasp(o);
            p.grasp(g, SAFE);
            if pass {
                let dx = if cb.position[0] > 0.0 { -0.2 } else { 0.2 };
                p.release_at(cb.position[0] + dx, cb.position[1], hold_z(&g, o, 0.002));
            } else {
                p.release_at(cb.position[0], cb.position[1], hold_z(&g, o, cb.top() + 0.01));
            }
        }
        CheckerSpec::Removed { target, from } => {
            let (t, f) = (s.resolve(target), s.resolve(from));
            let o = s.o(&t);
            let fb = s.b(&f);
            let g = body_grasp(o);
            p.grasp(g, SAFE);
            if pass {
                let a = fb.orientation;
                let d = fb.dimensions[0] / 2.0 + 0.1;
                let (x, y) = (fb.position[0] + d * a.cos(), fb.position[1] + d * a.sin());
                let (x, y) = if (-0.35..0.35).contains(&x) { (x, y) } else { (fb.position[0] - d * a.cos(), fb.position[1] - d * a.sin()) };
                p.release_at(x, y, hold_z(&g, o, 0.002));
            } else {
                p.release_at(g.x, g.y, g.z + 0.01);
            }
        }
        CheckerSpec::Wipe { tool, surface, avoid, .. } => {
            let tl = s.resolve(tool);
            let o = s.o(&tl);
            let g = body_grasp(o);
            p.grasp(g, SAFE);
            match surface {
                Some(surf) => {
                    let sb = s.b(&s.resolve(surf));
                    let z = hold_z(&g, o, sb.top() + 0.002);
                    let c = [sb.position[0], sb.position[1]];
                    if pass {
                        zigzag(&mut p, c, 0.05, &[-0.04, 0.0, 0.04], z);
                    } else {
                        zigzag(&mut p, c, 0.05, &[0.0], z);
                    }
                }
                None => {
                    let z = hold_z(&g, o, 0.002);
                    let c = [o.pose.x, o.pose.y];
                    if pass {
                        zigzag(&mut p, c, 0.04, &[0.0, -0.04, -0.08], z);
                    } else {
                        let ab = s.b(&s.resolve(&avoid[0]));
                        p.xy(c[0], c[1]).z(z).xy(ab.position[0], ab.position[1]).xy(c[0], c[1]);
                    }
                }
            }
            p.z(SAFE);
        }
        CheckerSpec::Shake { target, .. } => {
            let o = s.o(&s.resolve(target));
            let g = body_grasp(o);
            let top = g.z + 0.2;
            p.grasp(g, top);
            if pass {
                for _ in 0..3 {
                    p.z(top - 0.06).z(top);
                }
            }
            p.z(g.z + 0.003).open().z(SAFE);
        }
        CheckerSpec::Stir { tool, container, .. } => {
            let o = s.o(&s.resolve(tool));
            let mb = s.b(&s.resolve(container));
            let g = body_grasp(o);
            let c = [mb.position[0], mb.position[1]];
            p.grasp(g, hold_z(&g, o, mb.top() + 0.03)).xy(c[0], c[1]);
            if pass {
                p.z(hold_z(&g, o, mb.bottom() + 0.02)).xy(c[0] + 0.015, c[1]);
                circle(&mut p, c, 0.015, 24, 1.25);
            } else {
                p.z(hold_z(&g, o, mb.top() + 0.01)).xy(c[0] + 0.015, c[1]);
                circle(&mut p, c, 0.015, 24, 1.25);
            }
            p.z(hold_z(&g, o, mb.top() + 0.03));
        }
        CheckerSpec::Star { tool, circumradius, .. } => {
            let o = s.o(&s.resolve(tool));
            let g = body_grasp(o);
            let z = hold_z(&g, o, 0.002);
            let c = [o.pose.x + 0.2, o.pose.y];
            let pts = star_points(c, *circumradius, pass);
            p.grasp(g, SAFE).xy(pts[0][0], pts[0][1]).z(z);
            for q in &pts[1..] {
                p.xy(q[0], q[1]);
            }
            p.z(SAFE);
        }
        CheckerSpec::Circle { center, radius, .. } => {
            let r = if pass { *radius } else { radius + 0.03 };
            p.close().to(center[0] + r, center[1], 0.05, 0.0).z(0.005);
            circle(&mut p, *center, r, 36, 1.0);
            p.z(0.2);
        }
        CheckerSpec::KnockOver { target, .. } => {
            let b = s.b(&s.resolve(target));
            let z = if pass { b.top() - 0.04 } else { 0.02 };
            let y = b.position[1];
            p.z(SAFE).close().yaw(FRAC_PI_2).xy(b.position[0] - 0.1, y).z(z).xy(b.position[0] + 0.06, y).z(SAFE);
        }
        CheckerSpec::AlignAxis { target, .. } => {
            let o = s.o(&s.resolve(target));
            let g = body_grasp(o);
            let yaw = if pass { 0.0 } else { FRAC_PI_2 };
            p.grasp(g, g.z + 0.05).yaw(yaw).z(g.z + 0.003).open().z(SAFE);
        }
        CheckerSpec::Rotate { target, min_rotation, .. } => {
            let o = s.o(&s.resolve(target));
            let g = Grasp { yaw: 0.0, ..body_grasp(o) };
            let turn = (min_rotation + 0.3) * if pass { 1.0 } else { -1.0 };
            p.grasp(g, g.z).yaw(turn).open().z(SAFE);
        }
        CheckerSpec::Hang { target, rack, .. } => {
            let o = s.o(&s.resolve(target));
            let rb = s.b(&s.resolve(rack));
            let g = body_grasp(o);
            p.grasp(g, SAFE);
            if pass {
                p.release_at(rb.position[0], rb.position[1], hold_z(&g, o, rb.top() + 0.005));
            } else {
                let [x, y] = beside(&s, &o.name, &rb_name(task), 0.05);
                p.release_at(x, y, hold_z(&g, o, 0.002));
            }
        }
    }
    p.done()
}

fn rb_name(task: &Task) -> String {
    match &task.checker {
        CheckerSpec::Hang { rack: ObjectRef::Name(n), .. } => n.clone(),
        _ => String::new(),
    }
}

/// Runs a demo for `task` at `seed` and returns the episode log bytes.
pub fn calibration_log(task: &Task, seed: u64, kind: DemoKind) -> Result<Vec<u8>, BenchError> {
    let mut sim = Simulator::reset(&task.scene, seed).map_err(|e| BenchError::Catalog(e.to_string()))?;
    let traj = demo_trajectory(task, &sim, kind);
    sim.execute(&traj, DEFAULT_POS_STEP, DEFAULT_YAW_STEP);
    let mut log = EpisodeLog::default();
    log.push(EpisodeRecord::Attempt { attempt: 1, seed });
    log.records
        .extend(sim.history().iter().map(|s| EpisodeRecord::Tick(TickRecord::from_snapshot(1, s))));
    log.push(EpisodeRecord::End { task_completed: kind == DemoKind::Pass, replans_used: 0 });
    Ok(log.to_jsonl())
}

/// The trajectory as a program for the runner: one `execute_trajectory` call
/// per run of poses and one call per gripper command.
pub fn program_from_trajectory(t: &Trajectory) -> String {
    let mut out = String::new();
    let mut rows: Vec<String> = Vec::new();
    let flush = |rows: &mut Vec<String>, out: &mut String| {
        if !rows.is_empty() {
            out.push_str(&format!("execute_trajectory([{}])\n", rows.join(", ")));
            rows.clear();
        }
    };
    for step in &t.steps {
        match step {
            Step::Move(p) => rows.push(format!("[{}, {}, {}, {}]", p.x, p.y, p.z, p.yaw)),
            Step::MoveThen(p, g) => {
                rows.push(format!("[{}, {}, {}, {}]", p.x, p.y, p.z, p.yaw));
                flush(&mut rows, &mut out);
                out.push_str(if g.is_close() { "close_gripper()\n" } else { "open_gripper()\n" });
            }
            Step::Gripper(g) => {
                flush(&mut rows, &mut out);
                out.push_str(if g.is_close() { "close_gripper()\n" } else { "open_gripper()\n" });
            }
        }
    }
    flush(&mut rows, &mut out);
    out
}

fn detection_calls(task: &Task) -> Vec<String> {
    task.scene.objects.iter().map(|o| format!("detect_object(\"{}\")", o.name)).collect()
}

/// A scripted model that solves `task` at `seed` like an expert would.
///
/// Attempt `k` plays `attempts[k]` (the last entry repeats). Each attempt
/// first asks for every object's box, then answers with the demo motion; the
/// verdict is TRUE exactly for passing attempts, and failure summaries are
/// canned text.
pub fn expert_backend(task: &Task, seed: u64, mode: OutputMode, attempts: Vec<DemoKind>) -> ScriptedBackend {
    let task = task.clone();
    let mut attempt = 0usize;
    ScriptedBackend::from_fn(move |history| {
        let first = &history.first()?.content;
        let kind = attempts[attempt.saturating_sub(1).min(attempts.len() - 1)];
        if first.contains(VERDICT_PREFIX) {
            let v = kind == DemoKind::Pass;
            return Some(format!("Judging from the final boxes.\n{}", render_verdict(v)));
        }
        if history.len() == 1 && !first.contains("<!-- section:") {
            return Some("The gripper did not hold the object, so it never moved. Grasp a narrower part instead.".into());
        }
        let fresh = history.iter().filter(|m| m.role == Role::Assistant).count() == 0;
        if fresh {
            attempt += 1;
            let calls = detection_calls(&task);
            return Some(match mode {
                OutputMode::Numeric => format!("First I locate the objects.\n{}", calls.join("\n")),
                OutputMode::Code => format!("```python\n{}\n```", calls.join("\n")),
            });
        }
        let kind = attempts[(attempt - 1).min(attempts.len() - 1)];
        let sim = Simulator::reset(&task.scene, seed).ok()?;
        let traj = demo_trajectory(&task, &sim, kind);
        Some(match mode {
            OutputMode::Numeric => format!("Here is the motion.\n{}", format_trajectory(&traj)),
            OutputMode::Code => format!("```python\n{}task_completed()\n```", program_from_trajectory(&traj)),
        })
    })
    .with_model_name("expert-demo")
}
