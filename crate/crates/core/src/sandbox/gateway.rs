use std::io::{BufRead, BufReader, Read, Write};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::protocol::{load_program_message, parse_inbound, reply_message, ApiRequest, ApiResponse, Inbound};
use super::SandboxError;

/// How to start the runner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunnerCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl RunnerCommand {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
        }
    }

    /// A `.py` runner is started through `python3`; anything else is executed directly.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path: PathBuf = path.into();
        if path.extension().is_some_and(|e| e == "py") {
            Self {
                program: "python3".into(),
                args: vec![path.to_string_lossy().into_owned()],
            }
        } else {
            Self::new(path)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub wall_clock: Duration,
    /// Cap on each of the runner's stdout and stderr.
    pub output_bytes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            wall_clock: Duration::from_secs(120),
            output_bytes: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Exception(String),
    Timeout,
    ProtocolError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub outcome: Outcome,
    /// Requests served, in service order.
    pub api_calls: Vec<ApiRequest>,
    /// Captured standard error, truncated to the output cap.
    pub stderr: String,
    /// The child ran in its own network namespace.
    pub network_isolated: bool,
}

enum Line {
    Text(String),
    Overflow,
    Eof,
}

fn spawn_reader(stdout: impl Read + Send + 'static, cap: usize, tx: Sender<Line>) {
    thread::spawn(move || {
        let mut reader = BufReader::new(stdout);
        let mut total = 0usize;
        loop {
            let mut buf = Vec::new();
            let budget = (cap - total) as u64 + 1;
            match (&mut reader).take(budget).read_until(b'\n', &mut buf) {
                Ok(0) => {
                    let _ = tx.send(Line::Eof);
                    return;
                }
                Ok(n) => {
                    total += n;
                    if total > cap {
                        let _ = tx.send(Line::Overflow);
                        return;
                    }
                    let text = String::from_utf8_lossy(&buf).trim_end().to_string();
                    if tx.send(Line::Text(text)).is_err() {
                        return;
                    }
                }
                Err(_) => {
                    let _ = tx.send(Line::Eof);
                    return;
                }
            }
        }
    });
}

/// Collects stderr up to `cap` bytes, signalling `tx` once it overflows.
fn spawn_stderr(stderr: impl Read + Send + 'static, cap: usize, tx: Sender<Line>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut chunk = [0u8; 8192];
        let mut src = stderr;
        loop {
            match src.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len());
                    kept.extend_from_slice(&chunk[..n.min(room)]);
                    if n > room {
                        let _ = tx.send(Line::Overflow);
                        break;
                    }
                }
            }
        }
        String::from_utf8_lossy(&kept).into_owned()
    })
}

fn kill_group(child: &mut Child) {
    // SAFETY: signalling a process group we created; errors just mean it is gone.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn net_namespace(pid: &str) -> Option<PathBuf> {
    std::fs::read_link(format!("/proc/{pid}/ns/net")).ok()
}

/// Runs `code` in a fresh runner process, answering each API request with
/// `handler`, one at a time.
///
/// The child gets an empty environment, a private temporary working
/// directory, and (where the kernel permits) its own empty network namespace.
pub fn run_program(
    code: &str,
    runner: &RunnerCommand,
    limits: &Limits,
    handler: &mut dyn FnMut(&ApiRequest) -> ApiResponse,
) -> Result<RunResult, SandboxError> {
    let workdir = tempfile::tempdir().map_err(|e| SandboxError::Spawn(format!("temp dir: {e}")))?;
    let mut cmd = Command::new(&runner.program);
    cmd.args(&runner.args)
        .current_dir(workdir.path())
        .env_clear()
        .env("PATH", "/usr/local/bin:/usr/bin:/bin")
        .env("HOME", workdir.path())
        .env("TMPDIR", workdir.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    // SAFETY: only async-signal-safe libc calls between fork and exec.
    unsafe {
        cmd.pre_exec(|| {
            if libc::unshare(libc::CLONE_NEWNET) != 0 {
                libc::unshare(libc::CLONE_NEWUSER | libc::CLONE_NEWNET);
            }
            Ok(())
        });
    }
    let mut child = cmd
        .spawn()
        .map_err(|e| SandboxError::Spawn(format!("{}: {e}", runner.program.display())))?;
    let network_isolated = match (net_namespace(&child.id().to_string()), net_namespace("self")) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    };

    let deadline = Instant::now() + limits.wall_clock;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let (tx, lines) = mpsc::channel();
    spawn_reader(child.stdout.take().expect("piped stdout"), limits.output_bytes, tx.clone());
    let stderr = spawn_stderr(child.stderr.take().expect("piped stderr"), limits.output_bytes, tx);

    let mut api_calls = Vec::new();
    let outcome = serve(&mut stdin, &lines, code, deadline, limits, handler, &mut api_calls);
    drop(stdin);
    match outcome {
        Outcome::Completed | Outcome::Exception(_) => {
            // let a well-behaved runner exit on its own before reaping
            let grace = deadline.min(Instant::now() + Duration::from_secs(2));
            while Instant::now() < grace {
                if let Ok(Some(_)) = child.try_wait() {
                    break;
                }
                thread::sleep(Duration::from_millis(5));
            }
            kill_group(&mut child);
        }
        _ => kill_group(&mut child),
    }
    let stderr_text = stderr.join().unwrap_or_default();
    Ok(RunResult {
        outcome,
        api_calls,
        stderr: stderr_text,
        network_isolated,
    })
}

fn output_exceeded(limits: &Limits) -> Outcome {
    Outcome::Exception(format!(
        "OutputLimitExceeded: the program wrote more than {} bytes of output",
        limits.output_bytes
    ))
}

fn serve(
    stdin: &mut ChildStdin,
    lines: &Receiver<Line>,
    code: &str,
    deadline: Instant,
    limits: &Limits,
    handler: &mut dyn FnMut(&ApiRequest) -> ApiResponse,
    api_calls: &mut Vec<ApiRequest>,
) -> Outcome {
    if writeln!(stdin, "{}", load_program_message(code)).and_then(|_| stdin.flush()).is_err() {
        return Outcome::ProtocolError("runner closed its input before the program was sent".into());
    }
    let mut last_id = 0u64;
    loop {
        let remaining = deadline.saturating_duration_since(Instant::now());
        let line = match lines.recv_timeout(remaining) {
            Ok(Line::Text(t)) => t,
            Ok(Line::Overflow) => return output_exceeded(limits),
            Ok(Line::Eof) | Err(RecvTimeoutError::Disconnected) => {
                return Outcome::ProtocolError("runner exited without reporting completion".into())
            }
            Err(RecvTimeoutError::Timeout) => return Outcome::Timeout,
        };
        if line.is_empty() {
            continue;
        }
        let req = match parse_inbound(&line) {
            Ok(Inbound::Completed) => return Outcome::Completed,
            Ok(Inbound::Exception(tb)) => return Outcome::Exception(tb),
            Ok(Inbound::Request(req)) => req,
            Err(e) => return Outcome::ProtocolError(e),
        };
        if req.id <= last_id {
            return Outcome::ProtocolError(format!(
                "request id {} does not follow {last_id}",
                req.id
            ));
        }
        last_id = req.id;
        let resp = handler(&req);
        api_calls.push(req.clone());
        // a synchronous runner cannot have sent anything else yet
        match lines.try_recv() {
            Ok(Line::Text(t)) if !t.is_empty() => {
                return Outcome::ProtocolError(format!(
                    "runner sent {t:?} while request {} was outstanding",
                    req.id
                ))
            }
            Ok(Line::Overflow) => return output_exceeded(limits),
            _ => {}
        }
        if writeln!(stdin, "{}", reply_message(req.id, &resp))
            .and_then(|_| stdin.flush())
            .is_err()
        {
            return Outcome::ProtocolError(format!("runner stopped reading before reply {}", req.id));
        }
    }
}
