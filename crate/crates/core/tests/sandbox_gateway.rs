//! Gateway behaviour against the scripted mock runner.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::time::{Duration, Instant};

use serde_json::json;
use trajgen::geometry::Pose;
use trajgen::sandbox::{
    run_program, serve_call, ApiMethod, ApiRequest, CallContext, Limits, Outcome, RunnerCommand,
};
use trajgen::sim::{SceneObject, Shape, Simulator, TaskScene};

fn runner() -> RunnerCommand {
    RunnerCommand::new(env!("CARGO_BIN_EXE_trajgen-mock-runner"))
}

fn ok_handler(_: &ApiRequest) -> Result<serde_json::Value, String> {
    Ok(json!({"status": "done"}))
}

fn block_scene() -> TaskScene {
    TaskScene {
        id: "pick".into(),
        instruction: "pick up the block".into(),
        objects: vec![SceneObject {
            name: "block".into(),
            shape: Shape::Box { size: [0.04, 0.04, 0.04] },
            pose: Pose::new(0.1, 0.4, 0.0, 0.0),
            graspable: true,
            movable: true,
            parts: vec![],
            receptacle: None,
        }],
        randomization: BTreeMap::new(),
    }
}

#[test]
fn single_call_completes() {
    let r = run_program("open_gripper()", &runner(), &Limits::default(), &mut ok_handler).unwrap();
    assert_eq!(r.outcome, Outcome::Completed);
    assert_eq!(r.api_calls, vec![ApiRequest::simple(1, ApiMethod::OpenGripper)]);
}

#[test]
fn division_by_zero_is_an_exception() {
    let r = run_program("x = 2\n1/0\n", &runner(), &Limits::default(), &mut ok_handler).unwrap();
    match r.outcome {
        Outcome::Exception(tb) => {
            assert!(tb.contains("ZeroDivisionError"), "{tb}");
            assert!(tb.contains("line 2"), "{tb}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn name_error_names_the_identifier() {
    let r = run_program("move_arm_somewhere()", &runner(), &Limits::default(), &mut ok_handler).unwrap();
    assert!(matches!(r.outcome, Outcome::Exception(ref tb) if tb.contains("'move_arm_somewhere'")));
}

#[test]
fn runaway_program_is_killed_at_the_limit() {
    let limits = Limits {
        wall_clock: Duration::from_millis(700),
        ..Limits::default()
    };
    let start = Instant::now();
    let r = run_program("open_gripper()\nwhile True:\n    pass", &runner(), &limits, &mut ok_handler).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(r.outcome, Outcome::Timeout);
    assert_eq!(r.api_calls.len(), 1);
    assert!(elapsed >= Duration::from_millis(700) && elapsed < Duration::from_secs(5), "{elapsed:?}");
}

#[test]
fn output_flood_is_cut_off() {
    let limits = Limits {
        output_bytes: 4096,
        ..Limits::default()
    };
    let r = run_program("print(\"spam\" * 100000)\nopen_gripper()", &runner(), &limits, &mut ok_handler).unwrap();
    assert!(matches!(r.outcome, Outcome::Exception(ref m) if m.contains("OutputLimitExceeded")), "{:?}", r.outcome);
    assert!(r.stderr.len() <= 4096);
}

#[test]
fn error_replies_surface_in_the_program() {
    let scene = block_scene();
    let mut sim = Simulator::reset(&scene, 0).unwrap();
    let mut ctx = CallContext::default();
    let r = run_program("x = detect_object(\"sandwich\")", &runner(), &Limits::default(), &mut |req| {
        serve_call(req, &mut sim, &mut ctx)
    })
    .unwrap();
    assert!(matches!(r.outcome, Outcome::Exception(ref tb) if tb.contains("object not found: sandwich")));
}

#[test]
fn missing_runner_is_a_spawn_error() {
    let r = run_program("x", &RunnerCommand::new("/nonexistent/runner"), &Limits::default(), &mut ok_handler);
    assert!(r.is_err());
}

#[test]
fn recorded_calls_replay_to_the_same_history() {
    let code = r#"
x = detect_object("block")
execute_trajectory([[0.1, 0.4, 0.15, 0.0], [0.1, 0.4, 0.02, 0.0]])
close_gripper()
execute_trajectory([[0.1, 0.4, 0.02, 0.0],
                    [0.1, 0.4, 0.2, 0.0]])
task_completed()
"#;
    let scene = block_scene();
    let mut live = Simulator::reset(&scene, 3).unwrap();
    let mut ctx = CallContext::default();
    let r = run_program(code, &runner(), &Limits::default(), &mut |req| serve_call(req, &mut live, &mut ctx)).unwrap();
    assert_eq!(r.outcome, Outcome::Completed);
    assert!(ctx.task_completed);
    assert_eq!(r.api_calls.len(), 5);
    assert!(live.state().attached.is_some());

    let mut replayed = Simulator::reset(&scene, 3).unwrap();
    let mut ctx2 = CallContext::default();
    for req in &r.api_calls {
        serve_call(req, &mut replayed, &mut ctx2).unwrap();
    }
    assert_eq!(live.history(), replayed.history());
}

#[test]
fn child_cannot_reach_host_network_when_isolated() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let code = format!("connect(\"{addr}\")");
    let r = run_program(&code, &runner(), &Limits::default(), &mut ok_handler).unwrap();
    eprintln!("network isolated: {}", r.network_isolated);
    if r.network_isolated {
        assert!(matches!(r.outcome, Outcome::Exception(ref tb) if tb.contains("OSError")), "{:?}", r.outcome);
    } else {
        eprintln!("network namespaces unavailable here; isolation not asserted");
    }
}

#[test]
fn child_runs_in_a_private_directory() {
    std::fs::write("gateway-probe.txt", "x").ok();
    let r = run_program("read_file(\"gateway-probe.txt\")", &runner(), &Limits::default(), &mut ok_handler).unwrap();
    std::fs::remove_file("gateway-probe.txt").ok();
    assert!(matches!(r.outcome, Outcome::Exception(ref tb) if tb.contains("OSError")), "{:?}", r.outcome);
}
