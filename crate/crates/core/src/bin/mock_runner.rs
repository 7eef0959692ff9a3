//! Scripted stand-in for the program runner.
//!
//! Speaks the runner side of the sandbox wire protocol but, instead of a
//! general interpreter, executes a small line-oriented subset of the program
//! language: the five robot API calls with literal arguments, `print`, `raise`,
//! `1/0`, `while True:`, and two probes (`connect("host:port")`,
//! `read_file("path")`) used by isolation tests. Anything else raises a
//! `NameError`, like an undefined identifier would.

use std::io::{self, BufRead, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde_json::{json, Value};
use trajgen::sandbox::{request_message, ApiMethod, ApiRequest};

struct Failure {
    line: usize,
    source: String,
    message: String,
}

struct Runner<R, W> {
    input: R,
    output: W,
    next_id: u64,
}

impl<R: BufRead, W: Write> Runner<R, W> {
    fn send(&mut self, text: &str) {
        let _ = writeln!(self.output, "{text}");
        let _ = self.output.flush();
    }

    fn call(&mut self, method: ApiMethod, params: Value) -> Result<Value, String> {
        let req = ApiRequest {
            id: self.next_id,
            method,
            params,
        };
        self.next_id += 1;
        self.send(&request_message(&req));
        let mut line = String::new();
        if self.input.read_line(&mut line).unwrap_or(0) == 0 {
            std::process::exit(3);
        }
        let reply: Value = serde_json::from_str(&line).unwrap_or(Value::Null);
        if reply.get("id").and_then(Value::as_u64) != Some(req.id) {
            eprintln!("protocol abort: reply id mismatch");
            std::process::exit(4);
        }
        match reply.get("error") {
            Some(e) => Err(format!(
                "RuntimeError: {}",
                e.get("message").and_then(Value::as_str).unwrap_or("")
            )),
            None => Ok(reply.get("result").cloned().unwrap_or(Value::Null)),
        }
    }
}

fn string_arg(expr: &str) -> Option<String> {
    let inner = expr.trim();
    let q = inner.chars().next()?;
    if (q == '"' || q == '\'') && inner.len() >= 2 && inner.ends_with(q) {
        Some(inner[1..inner.len() - 1].to_string())
    } else {
        None
    }
}

fn call_args<'a>(stmt: &'a str, name: &str) -> Option<&'a str> {
    let rest = stmt.strip_prefix(name)?.trim_start();
    let rest = rest.strip_prefix('(')?;
    rest.trim_end().strip_suffix(')')
}

fn execute<R: BufRead, W: Write>(runner: &mut Runner<R, W>, code: &str) -> Result<(), Failure> {
    let lines: Vec<&str> = code.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let mut stmt = lines[i].trim().to_string();
        i += 1;
        // join continuation lines until brackets balance
        while stmt.matches(['[', '(']).count() > stmt.matches([']', ')']).count() && i < lines.len() {
            stmt.push_str(lines[i].trim());
            i += 1;
        }
        let fail = |message: String| Failure {
            line: lineno,
            source: lines[lineno - 1].trim().to_string(),
            message,
        };
        if stmt.is_empty() || stmt.starts_with('#') || stmt.starts_with("import ") || stmt.starts_with("from ") {
            continue;
        }
        let expr = match stmt.split_once('=') {
            Some((lhs, rhs))
                if lhs.trim().chars().all(|c| c.is_alphanumeric() || c == '_') && !rhs.starts_with('=') =>
            {
                rhs.trim()
            }
            _ => stmt.as_str(),
        };
        let result = if expr != stmt && expr.parse::<f64>().is_ok() {
            Ok(())
        } else if expr == "while True:" || expr == "while True: pass" {
            loop {
                std::thread::sleep(Duration::from_millis(10));
            }
        } else if call_args(expr, "open_gripper").is_some_and(str::is_empty) {
            runner.call(ApiMethod::OpenGripper, json!({})).map(drop)
        } else if call_args(expr, "close_gripper").is_some_and(str::is_empty) {
            runner.call(ApiMethod::CloseGripper, json!({})).map(drop)
        } else if call_args(expr, "task_completed").is_some_and(str::is_empty) {
            runner.call(ApiMethod::TaskCompleted, json!({})).map(drop)
        } else if let Some(a) = call_args(expr, "detect_object") {
            match string_arg(a) {
                Some(name) => runner.call(ApiMethod::DetectObject, json!({"object": name})).map(drop),
                None => Err("TypeError: detect_object() expects a string".into()),
            }
        } else if let Some(a) = call_args(expr, "execute_trajectory") {
            match serde_json::from_str::<Value>(a) {
                Ok(rows @ Value::Array(_)) => {
                    runner.call(ApiMethod::ExecuteTrajectory, json!({"trajectory": rows})).map(drop)
                }
                _ => Err("TypeError: execute_trajectory() expects a list of poses".into()),
            }
        } else if expr.split_once('/').is_some_and(|(_, r)| r.trim() == "0") {
            Err("ZeroDivisionError: division by zero".into())
        } else if let Some(rest) = expr.strip_prefix("raise ") {
            let (name, msg) = match rest.split_once('(') {
                Some((n, m)) => (n.trim(), string_arg(m.trim_end_matches(')')).unwrap_or_default()),
                None => (rest.trim(), String::new()),
            };
            Err(if msg.is_empty() { name.to_string() } else { format!("{name}: {msg}") })
        } else if let Some(a) = call_args(expr, "print") {
            let text = match a.split_once('*') {
                Some((s, n)) => string_arg(s)
                    .zip(n.trim().parse::<usize>().ok())
                    .map(|(s, n)| s.repeat(n)),
                None => string_arg(a),
            };
            match text {
                Some(t) => {
                    let mut err = io::stderr().lock();
                    let _ = writeln!(err, "{t}");
                    Ok(())
                }
                None => Err("SyntaxError: unsupported print argument".into()),
            }
        } else if let Some(a) = call_args(expr, "connect").and_then(string_arg) {
            let addr = a.to_socket_addrs().ok().and_then(|mut it| it.next());
            match addr.map(|s| TcpStream::connect_timeout(&s, Duration::from_secs(2))) {
                Some(Ok(_)) => Ok(()),
                Some(Err(e)) => Err(format!("OSError: {e}")),
                None => Err(format!("OSError: cannot resolve {a}")),
            }
        } else if let Some(a) = call_args(expr, "read_file").and_then(string_arg) {
            std::fs::read(&a).map(drop).map_err(|e| format!("OSError: {a}: {e}"))
        } else {
            let ident: String = expr
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            Err(format!("NameError: name '{ident}' is not defined"))
        };
        result.map_err(fail)?;
    }
    Ok(())
}

fn main() {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut first = String::new();
    if input.read_line(&mut first).unwrap_or(0) == 0 {
        std::process::exit(2);
    }
    let load: Value = serde_json::from_str(&first).unwrap_or(Value::Null);
    if load.get("method").and_then(Value::as_str) != Some("load_program") {
        eprintln!("protocol abort: expected load_program");
        std::process::exit(2);
    }
    let code = load
        .pointer("/params/code")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let mut runner = Runner {
        input,
        output: io::stdout().lock(),
        next_id: 1,
    };
    match execute(&mut runner, &code) {
        Ok(()) => {
            runner.send(&json!({"id": -1, "event": "completed"}).to_string());
        }
        Err(f) => {
            let tb = format!(
                "Traceback (most recent call last):\n  File \"<program>\", line {}, in <module>\n    {}\n{}",
                f.line, f.source, f.message
            );
            runner.send(&json!({"id": -1, "event": "exception", "traceback": tb}).to_string());
            std::process::exit(1);
        }
    }
}
