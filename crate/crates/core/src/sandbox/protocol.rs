use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// The five robot API functions a generated program may call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiMethod {
    DetectObject,
    ExecuteTrajectory,
    OpenGripper,
    CloseGripper,
    TaskCompleted,
}

impl ApiMethod {
    pub const ALL: [ApiMethod; 5] = [
        ApiMethod::DetectObject,
        ApiMethod::ExecuteTrajectory,
        ApiMethod::OpenGripper,
        ApiMethod::CloseGripper,
        ApiMethod::TaskCompleted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ApiMethod::DetectObject => "detect_object",
            ApiMethod::ExecuteTrajectory => "execute_trajectory",
            ApiMethod::OpenGripper => "open_gripper",
            ApiMethod::CloseGripper => "close_gripper",
            ApiMethod::TaskCompleted => "task_completed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiRequest {
    pub id: u64,
    pub method: ApiMethod,
    #[serde(default)]
    pub params: Value,
}

impl ApiRequest {
    pub fn detect(id: u64, object: &str) -> Self {
        Self {
            id,
            method: ApiMethod::DetectObject,
            params: json!({ "object": object }),
        }
    }

    pub fn execute(id: u64, rows: &[Vec<f64>]) -> Self {
        Self {
            id,
            method: ApiMethod::ExecuteTrajectory,
            params: json!({ "trajectory": rows }),
        }
    }

    pub fn simple(id: u64, method: ApiMethod) -> Self {
        Self {
            id,
            method,
            params: json!({}),
        }
    }
}

/// Result or error message for one request.
pub type ApiResponse = Result<Value, String>;

// Written by hand so the key order on the wire is fixed.
pub fn load_program_message(code: &str) -> String {
    format!(
        r#"{{"id":0,"method":"load_program","params":{{"code":{}}}}}"#,
        Value::from(code)
    )
}

pub fn request_message(req: &ApiRequest) -> String {
    format!(
        r#"{{"id":{},"method":"{}","params":{}}}"#,
        req.id,
        req.method.name(),
        req.params
    )
}

pub fn reply_message(id: u64, resp: &ApiResponse) -> String {
    match resp {
        Ok(v) => format!(r#"{{"id":{id},"result":{v}}}"#),
        Err(msg) => format!(r#"{{"id":{id},"error":{{"message":{}}}}}"#, Value::from(msg.as_str())),
    }
}

/// A line written by the runner.
#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    Request(ApiRequest),
    Completed,
    Exception(String),
}

/// Decodes one runner line. Errors describe the protocol violation.
pub fn parse_inbound(line: &str) -> Result<Inbound, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("undecodable line {line:?}: {e}"))?;
    let id = v.get("id").and_then(Value::as_i64).ok_or_else(|| format!("missing id in {line:?}"))?;
    if id == -1 {
        return match v.get("event").and_then(Value::as_str) {
            Some("completed") => Ok(Inbound::Completed),
            Some("exception") => Ok(Inbound::Exception(
                v.get("traceback").and_then(Value::as_str).unwrap_or_default().to_string(),
            )),
            other => Err(format!("unknown event {other:?}")),
        };
    }
    if id <= 0 {
        return Err(format!("request id must be positive, got {id}"));
    }
    let name = v
        .get("method")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("request {id} has no method"))?;
    let method = ApiMethod::from_name(name).ok_or_else(|| format!("unknown method {name:?}"))?;
    let params = v.get("params").cloned().unwrap_or_else(|| json!({}));
    Ok(Inbound::Request(ApiRequest {
        id: id as u64,
        method,
        params,
    }))
}
