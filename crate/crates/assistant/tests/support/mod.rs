#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use assistant::app;
use assistant::server::{router, ServerState};
use assistant_core::actions::{vehicle_fixtures, VEHICLE_WAKE_WORD};
use assistant_core::dialogue::StageDelays;
use assistant_core::nlu::ModelFile;
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

/// The bundled pack, trained once per test binary.
pub fn model() -> &'static ModelFile {
    static MODEL: OnceLock<ModelFile> = OnceLock::new();
    MODEL.get_or_init(|| app::bundled_model().unwrap())
}

/// A fresh server (empty in-memory store) over the bundled model.
pub fn server(console: Option<&Path>) -> Router {
    let engine = app::build_engine(model(), &vehicle_fixtures(), StageDelays::default()).unwrap();
    let store = app::open_store(engine.spec(), None).unwrap();
    let assistant = app::build_assistant(engine, store, VEHICLE_WAKE_WORD).unwrap();
    router(ServerState::new(assistant, model().fingerprint()), console)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub async fn post_raw(app: &Router, body: impl Into<Body>) -> (StatusCode, serde_json::Value) {
    let req = Request::post("/webhooks/rest/webhook")
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
}

pub async fn say(app: &Router, sender: &str, message: &str) -> (StatusCode, serde_json::Value) {
    post_raw(app, serde_json::json!({ "sender": sender, "message": message }).to_string()).await
}

/// Replays a golden exchange file against a fresh server; returns the
/// mismatches (empty when the wire contract holds).
pub async fn check_golden(name: &str) -> Vec<String> {
    let path = golden_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let exchanges: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    let app = server(None);
    let mut problems = Vec::new();
    for (i, ex) in exchanges.iter().enumerate() {
        let body = match (&ex["request"], &ex["raw"]) {
            (serde_json::Value::Null, serde_json::Value::String(raw)) => raw.clone(),
            (req, _) => req.to_string(),
        };
        let (status, got) = post_raw(&app, body).await;
        let want_status = ex["status"].as_u64().unwrap() as u16;
        if status.as_u16() != want_status {
            problems.push(format!("{name} #{i}: status {status}, want {want_status}"));
            continue;
        }
        if let Some(want) = ex.get("response") {
            if &got != want {
                problems.push(format!("{name} #{i}: got {got}, want {want}"));
            }
        } else if got.get("error").and_then(|e| e.as_str()).is_none() {
            problems.push(format!("{name} #{i}: error body lacks `error`: {got}"));
        }
    }
    problems
}

/// Per-sender scripts for the concurrency check: every module flow plus
/// chatter, ten turns each.
pub fn sender_script(i: usize) -> Vec<&'static str> {
    const FLOWS: [&[&str]; 6] = [
        &["coffee", "hello", "goodbye", "hello"],
        &["coffee", "play some music", "Stan", "yes"],
        &["coffee", "open maps", "New York", "yes"],
        &["coffee", "make a call", "John", "yes"],
        &["coffee", "what's the weather", "Mumbai", "yes"],
        &["coffee", "what's the news", "yes", "yes", "no"],
    ];
    const CHATTER: [&str; 6] = ["hello", "zzqx", "what's the weather in Delhi", "no", "coffee", "goodbye"];
    let mut turns: Vec<&str> = FLOWS[i % FLOWS.len()].to_vec();
    let mut k = i;
    while turns.len() < 10 {
        turns.push(CHATTER[k % CHATTER.len()]);
        k += 1;
    }
    turns
}

pub type Transcript = Vec<(String, serde_json::Value)>;

pub async fn run_serial(app: &Router, senders: usize) -> Vec<Transcript> {
    let mut out = Vec::new();
    for i in 0..senders {
        let sender = format!("driver-{i}");
        let mut t = Vec::new();
        for turn in sender_script(i) {
            let (status, body) = say(app, &sender, turn).await;
            assert_eq!(status, StatusCode::OK);
            t.push((turn.to_string(), body));
        }
        out.push(t);
    }
    out
}

pub async fn run_concurrent(app: &Router, senders: usize) -> Vec<Transcript> {
    let tasks: Vec<_> = (0..senders)
        .map(|i| {
            let app = app.clone();
            tokio::spawn(async move {
                let sender = format!("driver-{i}");
                let mut t = Vec::new();
                for turn in sender_script(i) {
                    let (status, body) = say(&app, &sender, turn).await;
                    assert_eq!(status, StatusCode::OK);
                    t.push((turn.to_string(), body));
                }
                t
            })
        })
        .collect();
    let mut out = Vec::new();
    for task in tasks {
        out.push(task.await.unwrap());
    }
    out
}
