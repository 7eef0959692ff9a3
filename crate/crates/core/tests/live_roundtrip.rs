//! Live backend against a local HTTP stub, recorded, then replayed.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use serde_json::{json, Value};
use trajgen::bench::{expert_backend, Catalog, DemoKind};
use trajgen::chat::{
    ChatBackend, ChatMessage, ChatParams, LiveBackend, LiveConfig, RecordingBackend, ReplayBackend,
};
use trajgen::orchestrator::{run_episode, EpisodeConfig};
use trajgen::parser::{GripperMode, OutputMode};

/// Answers every chat-completions request with the inner backend's reply
/// until the client stops connecting.
fn serve(mut inner: impl ChatBackend + 'static) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let req: Value = serde_json::from_slice(&buf).unwrap();
            let history: Vec<ChatMessage> = serde_json::from_value(req["messages"].clone()).unwrap();
            let reply = inner.chat(&history, &ChatParams::default()).unwrap();
            let body = json!({"choices": [{"message": {"role": "assistant", "content": reply.content}}]}).to_string();
            let out = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(out.as_bytes()).unwrap();
        }
    });
    url
}

#[test]
fn live_record_then_replay_gives_the_same_log() {
    let task = Catalog::embedded().get("pick_up_bowl").unwrap().clone();
    let seed = 3;
    let plan = vec![DemoKind::Fail, DemoKind::Pass];
    let url = serve(expert_backend(&task, seed, OutputMode::Numeric, plan));
    let mut cfg = LiveConfig::new(url, "stub-model");
    cfg.api_key = Some("test-key".into());
    let episode = EpisodeConfig::numeric(GripperMode::Explicit);

    let mut rec = RecordingBackend::new(LiveBackend::new(cfg), task.id());
    rec.set_seed(seed);
    let live = run_episode(&task, seed, &episode, &mut rec);
    assert!(live.error.is_none(), "{:?}", live.error);
    assert!(live.task_completed);
    assert_eq!(live.replans_used, 1);

    let transcript = rec.into_transcript();
    assert_eq!(transcript.model, "stub-model");
    assert_eq!(transcript.turns(), live.llm_queries);
    let mut replay = ReplayBackend::new(transcript).strict(true);
    let again = run_episode(&task, seed, &episode, &mut replay);
    assert!(replay.is_finished());
    assert_eq!(again.log.to_jsonl(), live.log.to_jsonl());
    assert_eq!(again.llm_queries, live.llm_queries);
}
