use serde_json::{json, Value};

use super::protocol::{ApiMethod, ApiRequest, ApiResponse};
use crate::geometry::{BBox3D, GripperCommand, Pose, Step, Trajectory, DEFAULT_POS_STEP, DEFAULT_YAW_STEP};
use crate::sim::Simulator;

/// Per-episode settings and signals shared between calls.
#[derive(Debug, Clone, PartialEq)]
pub struct CallContext {
    pub noise_sigma: f64,
    pub pos_step: f64,
    pub yaw_step: f64,
    /// Set once the program calls `task_completed()`.
    pub task_completed: bool,
}

impl Default for CallContext {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            pos_step: DEFAULT_POS_STEP,
            yaw_step: DEFAULT_YAW_STEP,
            task_completed: false,
        }
    }
}

pub fn bbox_json(b: &BBox3D) -> Value {
    json!({
        "position": b.position,
        "orientation": b.orientation,
        "dimensions": b.dimensions,
    })
}

fn rows_to_trajectory(params: &Value) -> Result<Trajectory, String> {
    let rows = params
        .get("trajectory")
        .and_then(Value::as_array)
        .ok_or("execute_trajectory expects a list of poses")?;
    if rows.is_empty() {
        return Err("execute_trajectory received an empty trajectory".into());
    }
    let mut steps = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let vals: Vec<f64> = row
            .as_array()
            .ok_or_else(|| format!("pose {i} is not a list"))?
            .iter()
            .map(|v| v.as_f64().filter(|f| f.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| format!("pose {i} contains a value that is not a finite number"))?;
        let pose = |v: &[f64]| Pose::new(v[0], v[1], v[2], v[3]);
        steps.push(match vals.len() {
            4 => Step::Move(pose(&vals)),
            5 if vals[4] == 0.0 || vals[4] == 1.0 => {
                Step::MoveThen(pose(&vals), GripperCommand::from_flag(vals[4] == 1.0))
            }
            n => return Err(format!("pose {i} has {n} values; expected [x, y, z, yaw]")),
        });
    }
    Ok(Trajectory::new(steps))
}

/// Answers one API request against the simulator.
pub fn serve_call(req: &ApiRequest, sim: &mut Simulator, ctx: &mut CallContext) -> ApiResponse {
    match req.method {
        ApiMethod::DetectObject => {
            let name = req
                .params
                .get("object")
                .and_then(Value::as_str)
                .ok_or("detect_object expects an object name")?;
            sim.detect_object(name, ctx.noise_sigma)
                .map(|b| bbox_json(&b))
                .map_err(|e| e.to_string())
        }
        ApiMethod::ExecuteTrajectory => {
            let t = rows_to_trajectory(&req.params)?;
            let report = sim.execute(&t, ctx.pos_step, ctx.yaw_step);
            Ok(json!({"status": "done", "ticks": report.moves}))
        }
        ApiMethod::OpenGripper => {
            sim.set_gripper(true);
            Ok(json!({"status": "done"}))
        }
        ApiMethod::CloseGripper => {
            sim.set_gripper(false);
            Ok(json!({"status": "done"}))
        }
        ApiMethod::TaskCompleted => {
            ctx.task_completed = true;
            Ok(json!({"acknowledged": true}))
        }
    }
}
