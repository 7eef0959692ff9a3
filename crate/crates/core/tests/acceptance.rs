//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use trajgen::bench::{
    ablation_variants, calibration_log, check_success, demo_trajectory, expert_backend, run_ablation, Catalog,
    DemoKind, Task, Variant,
};
use trajgen::chat::{ChatBackend, ScriptedBackend};
use trajgen::geometry::{densify, fit_bbox3, CameraModel, Extrinsic, Pose, Step, Trajectory};
use trajgen::orchestrator::{run_episode, AttemptOutcome, EpisodeConfig, EpisodeRecord, TickRecord};
use trajgen::parser::{format_trajectory, GripperMode, OutputMode};
use trajgen::prompt::{build_main_prompt, Flag};
use trajgen::sandbox::RunnerCommand;
use trajgen::sim::Simulator;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn task(id: &str) -> Task {
    Catalog::embedded().get(id).unwrap().clone()
}

fn mock_runner() -> RunnerCommand {
    RunnerCommand::new(env!("CARGO_BIN_EXE_trajgen-mock-runner"))
}

// ---------------------------------------------------------------------------
// geometry

/// Brute-force minimum footprint: axis-aligned extents after rotating by every
/// multiple of 0.05 degrees in [0, 90).
fn sweep_min_area(points: &[[f64; 3]]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..1800 {
        let a = (k as f64 * 0.05).to_radians();
        let (s, c) = a.sin_cos();
        let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            let u = c * p[0] + s * p[1];
            let v = -s * p[0] + c * p[1];
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        best = best.min((u1 - u0) * (v1 - v0));
    }
    best
}

/// Largest area the sweep can report when the optimum is `a` by `b`: some
/// grid angle lies within 0.025 degrees of the optimal orientation.
fn sweep_ceiling(a: f64, b: f64) -> f64 {
    let (s, c) = 0.025f64.to_radians().sin_cos();
    (a * c + b * s) * (a * s + b * c)
}

fn random_cloud(rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let n = rng.random_range(3..=500);
    let (cx, cy) = (rng.random_range(-0.4..0.4), rng.random_range(0.1..0.7));
    let (w, l, h) = (rng.random_range(0.01..0.3), rng.random_range(0.01..0.3), rng.random_range(0.01..0.3));
    let (s, c) = rng.random_range(-3.2..3.2f64).sin_cos();
    (0..n)
        .map(|_| {
            let (u, v) = (rng.random_range(-0.5..0.5) * w, rng.random_range(-0.5..0.5) * l);
            [cx + c * u - s * v, cy + s * u + c * v, rng.random_range(0.0..h)]
        })
        .collect()
}

fn geometry_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let clouds: Vec<_> = (0..200).map(|_| random_cloud(&mut rng)).collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut beyond = 0;
    for (i, pts) in clouds.iter().enumerate() {
        let b = fit_bbox3(pts).map_err(|e| format!("set {i}: {e}"))?;
        let area = b.dimensions[0] * b.dimensions[1];
        let oracle = sweep_min_area(pts);
        worst = worst.max((area - oracle).abs());
        ensure(pts.iter().all(|p| b.contains(*p, 1e-9)), || format!("set {i}: a point lies outside the box"))?;
        if (area - oracle).abs() > 1e-6 {
            beyond += 1;
        }
        // never worse than the sweep
        ensure(area <= oracle + 1e-6, || format!("set {i}: area {area:e} exceeds sweep {oracle:e}"))?;
        // and better only by what the sweep's angular grid can miss
        let ceiling = sweep_ceiling(b.dimensions[0], b.dimensions[1]);
        ensure(oracle <= ceiling + 1e-12, || format!("set {i}: sweep {oracle:e} above grid bound {ceiling:e}"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!(
        "200 sets, all points enclosed, max |area - sweep| = {worst:.2e} m^2 ({beyond} sets beyond 1e-6, each smaller than the sweep and within its grid bound), {took:.2?}"
    ))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (a, b, c) = (
        rng.random_range(-3.1..3.1f64),
        rng.random_range(-1.5..1.5f64),
        rng.random_range(-3.1..3.1f64),
    );
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        m
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

fn projection_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let rotation = random_rotation(&mut rng);
        let translation = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.2..2.0)];
        let cam = CameraModel::new(600.0, 580.0, 320.0, 240.0, 640, 480, Extrinsic { rotation, translation })
            .map_err(|e| e.to_string())?;
        // a point in front of the camera, expressed in the world frame
        let local = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(0.1..3.0)];
        let world: [f64; 3] =
            std::array::from_fn(|r| translation[r] + (0..3).map(|k| rotation[r][k] * local[k]).sum::<f64>());
        let (u, v, d) = cam.project(world);
        let back = cam.deproject(u, v, d);
        let err = (0..3).map(|k| (back[k] - world[k]).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err);
        ensure(err < 1e-9, || format!("point {i}: error {err:e}"))?;
    }
    Ok(format!("10000 points, max error {worst:.2e} m"))
}

fn densify_contract() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (pos_step, yaw_step) = (0.01, 0.05);
    let pose = |rng: &mut ChaCha8Rng| {
        Pose::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(0.0..0.8),
            rng.random_range(0.0..0.5),
            rng.random_range(-PI..PI),
        )
    };
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (a, b) = (pose(&mut rng), pose(&mut rng));
        let dense = densify(&Trajectory::new(vec![Step::Move(a), Step::Move(b)]), pos_step, yaw_step);
        let poses: Vec<Pose> = dense.poses().copied().collect();
        ensure(poses.first() == Some(&a) && poses.last() == Some(&b), || format!("pair {i}: endpoints moved"))?;
        for w in poses.windows(2) {
            let gap = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2) + (w[1].z - w[0].z).powi(2)).sqrt();
            worst = worst.max(gap);
            ensure(gap <= pos_step + 1e-12, || format!("pair {i}: gap {gap}"))?;
        }
    }
    Ok(format!("1000 pairs, max gap {worst:.6} m <= {pos_step} m, endpoints exact"))
}

// ---------------------------------------------------------------------------
// orchestration

fn correction_budget() -> Verdict {
    let t = task("pick_up_bowl");
    let sim = Simulator::reset(&t.scene, 0).unwrap();
    let good = format_trajectory(&demo_trajectory(&t, &sim, DemoKind::Pass));
    let cfg = EpisodeConfig::numeric(GripperMode::Explicit);
    for k in 0..=3 {
        let mut script = vec!["no trajectory in this answer".to_string(); k];
        script.push(good.clone());
        script.push("TASK COMPLETED: TRUE".into());
        let mut b = ScriptedBackend::new(script);
        let r = run_episode(&t, 0, &cfg, &mut b);
        ensure(r.task_completed && r.checker_verdict(), || format!("{k} corrections: no success"))?;
        ensure(r.corrections() == k, || format!("{k} corrections: counted {}", r.corrections()))?;
    }
    let mut b = ScriptedBackend::new(["no trajectory in this answer"; 4]);
    let r = run_episode(&t, 0, &cfg, &mut b);
    let a = &r.attempts[0];
    ensure(matches!(a.outcome, AttemptOutcome::Invalid(_)), || "4 bad outputs did not invalidate the attempt".into())?;
    ensure(a.corrections == 3 && b.calls() == 4 && !r.task_completed, || {
        format!("4 bad outputs: {} corrections, {} queries", a.corrections, b.calls())
    })?;
    Ok("success after 0/1/2/3 corrections; 4 bad outputs -> invalid with 3 correction queries".into())
}

fn golden_replay() -> Verdict {
    let start = Instant::now();
    ensure(common::GOLDEN.len() >= 6, || "fewer than 6 fixtures".into())?;
    for g in common::GOLDEN {
        let (r, expected) = common::replay(g);
        ensure(r.log.to_jsonl() == expected, || format!("{}: log bytes differ", g.name))?;
        let checker = check_success(g.task, &expected).map_err(|e| e.to_string())?;
        ensure(checker == r.checker_verdict() && checker, || format!("{}: checker verdict {checker}", g.name))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{} fixtures replayed bit-identically in {took:.2?}; circle within 0.015 m", common::GOLDEN.len()))
}

fn attempt_ticks(records: &[EpisodeRecord], attempt: usize) -> Vec<&TickRecord> {
    records
        .iter()
        .filter_map(|r| match r {
            EpisodeRecord::Tick(t) if t.attempt == attempt => Some(t),
            _ => None,
        })
        .collect()
}

/// XY distance from the bowl centre where the gripper first closes.
fn close_offset(ticks: &[&TickRecord]) -> Option<f64> {
    let t = ticks.iter().find(|t| !t.gripper_open)?;
    let b = t.objects["bowl"].position;
    Some(((t.gripper[0] - b[0]).powi(2) + (t.gripper[1] - b[1]).powi(2)).sqrt())
}

fn replan_recovery() -> Verdict {
    let (r, _) = common::replay(common::golden("bowl_replan"));
    ensure(r.attempts.len() == 3 && r.replans_used == 2, || format!("{} attempts", r.attempts.len()))?;
    let first = &r.attempts[0];
    ensure(!first.llm_verdict && !first.checker_verdict, || "attempt 1 was judged a success".into())?;
    let ticks = attempt_ticks(&r.log.records, first.index);
    let z0 = ticks[0].objects["bowl"].position[2];
    let rose = ticks.iter().map(|t| t.objects["bowl"].position[2] - z0).fold(0.0, f64::max);
    ensure(rose < 1e-9, || format!("bowl rose {rose} m in attempt 1"))?;
    let centroid = close_offset(&ticks).ok_or("attempt 1 never closed")?;
    let last = &r.attempts[2];
    ensure(last.llm_verdict && last.checker_verdict, || "attempt 3 failed".into())?;
    let rim = close_offset(&attempt_ticks(&r.log.records, last.index)).ok_or("attempt 3 never closed")?;
    ensure(centroid < 0.02 && rim > 0.05, || format!("close offsets {centroid:.3} / {rim:.3}"))?;
    Ok(format!(
        "centroid grasp (offset {centroid:.3} m) left the bowl on the table; rim grasp (offset {rim:.3} m) succeeded on attempt 3"
    ))
}

// ---------------------------------------------------------------------------
// benchmark

fn thresholds(tasks: &[Task]) -> Result<(), String> {
    for t in tasks {
        let c: Value = serde_json::to_value(&t.checker).unwrap();
        let expect: &[(&str, Value)] = match c["kind"].as_str().unwrap() {
            "lift" => &[("min_gain", 0.10.into())],
            "proximity" | "proximity_any" | "push_to" => &[("max_distance", 0.05.into())],
            "displace" => &[("min_distance", 0.10.into())],
            "circle" => &[
                ("center", serde_json::json!([0.0, 0.3])),
                ("radius", 0.05.into()),
                ("tolerance", 0.015.into()),
            ],
            _ => &[],
        };
        for (k, v) in expect {
            ensure(&c[k] == v, || format!("{}: {k} = {} (expected {v})", t.id(), c[k]))?;
        }
    }
    Ok(())
}

fn checker_calibration() -> Verdict {
    let tasks: Vec<Task> = Catalog::embedded().tasks().to_vec();
    ensure(tasks.len() == 30, || format!("{} tasks", tasks.len()))?;
    thresholds(&tasks)?;
    let mut pairs = 0;
    for t in &tasks {
        for seed in 0..5 {
            for (kind, want) in [(DemoKind::Pass, true), (DemoKind::Fail, false)] {
                let log = calibration_log(t, seed, kind).map_err(|e| e.to_string())?;
                let got = t.checker.check_log(&log).map_err(|e| e.to_string())?;
                ensure(got == want, || format!("{} seed {seed} {kind:?}: checker said {got}", t.id()))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pass/fail pairs over 30 tasks separated 100%; thresholds 0.10 lift, 0.05 proximity, 0.10 displace, circle r 0.05 at (0, 0.3)"))
}

fn mode_parity() -> Verdict {
    let t = task("pick_rightmost_can");
    let seed = 2;
    let mut numeric_b = expert_backend(&t, seed, OutputMode::Numeric, vec![DemoKind::Pass]);
    let numeric = run_episode(&t, seed, &EpisodeConfig::numeric(GripperMode::Explicit), &mut numeric_b);
    let mut code_b = expert_backend(&t, seed, OutputMode::Code, vec![DemoKind::Pass]);
    let code = run_episode(&t, seed, &EpisodeConfig::code(mock_runner(), GripperMode::Explicit), &mut code_b);
    for (name, r) in [("numeric", &numeric), ("code", &code)] {
        ensure(r.task_completed && r.checker_verdict(), || format!("{name} mode failed: {:?}", r.error))?;
    }
    ensure(numeric.sandbox_spawns == 0, || format!("numeric mode spawned {}", numeric.sandbox_spawns))?;
    ensure(code.sandbox_spawns > 0, || "code mode never used the runner".into())?;
    let (a, b) = (&numeric.attempts[0].final_poses, &code.attempts[0].final_poses);
    ensure(a.keys().eq(b.keys()), || "different object sets".into())?;
    let mut worst = 0.0f64;
    for (name, p) in a {
        let q = b[name];
        worst = worst.max((p.x - q.x).abs().max((p.y - q.y).abs()).max((p.z - q.z).abs()).max((p.yaw - q.yaw).abs()));
    }
    ensure(worst <= 1e-9, || format!("final poses differ by {worst:e}"))?;
    Ok(format!("both modes succeed, final poses agree to {worst:.1e}, numeric spawns 0, code spawns {}", code.sandbox_spawns))
}

/// `base` with the delimited block for `name` cut out, along with the
/// separator that joined it to the preceding text.
fn without_section(base: &str, name: &str) -> Option<String> {
    let open = format!("<!-- section: {name} -->");
    let close = format!("<!-- /section: {name} -->");
    let start = base.find(&open)?;
    let end = base.find(&close)? + close.len();
    let lead = if base[..start].ends_with("\n\n") { 2 } else { 1 };
    Some(format!("{}{}", &base[..start - lead], &base[end..]))
}

fn ablation_plumbing() -> Verdict {
    let base_cfg = EpisodeConfig::code(mock_runner(), GripperMode::Explicit);
    let base = build_main_prompt(&base_cfg.prompt).map_err(|e| e.to_string())?;
    for flag in Flag::ALL {
        let variant = build_main_prompt(&base_cfg.prompt.clone().without(flag)).map_err(|e| e.to_string())?;
        let expected = without_section(&base, flag.name()).ok_or_else(|| format!("{flag}: no section in base"))?;
        ensure(variant == expected, || format!("{flag}: variant is not base minus one section"))?;
    }
    let variants = ablation_variants(&base_cfg, &Flag::ALL).map_err(|e| e.to_string())?;
    let t = task("pick_up_bowl");
    let backends = |_: &Variant, t: &Task, seed: u64| -> Box<dyn ChatBackend> {
        Box::new(expert_backend(t, seed, OutputMode::Code, vec![DemoKind::Pass]))
    };
    let table = run_ablation(&variants, &[&t], 1, 0, &backends).map_err(|e| e.to_string())?;
    ensure(table.variants.len() == Flag::ALL.len() + 1 && table.tables.len() == table.variants.len(), || {
        format!("{} columns", table.variants.len())
    })?;
    let header = table.to_report().lines().next().unwrap_or_default().to_string();
    ensure(variants.iter().all(|v| header.contains(&v.name)), || "report header misses a variant".into())?;
    Ok(format!("9 flags each remove exactly one delimited section; table has {} columns", table.variants.len()))
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("geometry oracle equivalence", geometry_oracle),
        ("projection round trip", projection_round_trip),
        ("densify contract", densify_contract),
        ("correction budget", correction_budget),
        ("golden replay episodes", golden_replay),
        ("replan recovery", replan_recovery),
        ("checker calibration", checker_calibration),
        ("numeric-vs-code parity", mode_parity),
        ("ablation plumbing", ablation_plumbing),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        // written straight to stderr so the lines show without --nocapture
        let line = match &verdict {
            Ok(detail) => format!("ACCEPTANCE PASS {name}: {detail}\n"),
            Err(why) => format!("ACCEPTANCE FAIL {name}: {why}\n"),
        };
        let _ = err.write_all(line.as_bytes());
        if verdict.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
