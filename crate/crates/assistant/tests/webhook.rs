mod support;

use assistant::app;
use assistant_core::actions::{vehicle_fixtures, VEHICLE_WAKE_WORD};
use assistant_core::channel::run_repl;
use assistant_core::dialogue::StageDelays;
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use support::{check_golden, golden_dir, model, run_concurrent, run_serial, say, server};
use tower::ServiceExt;

#[tokio::test]
async fn golden_wake_ack() {
    assert_eq!(check_golden("wake_ack.json").await, Vec::<String>::new());
}

#[tokio::test]
async fn golden_greet_and_goodbye() {
    assert_eq!(check_golden("greet.json").await, Vec::<String>::new());
}

#[tokio::test]
async fn golden_weather_flow() {
    assert_eq!(check_golden("weather_flow.json").await, Vec::<String>::new());
}

#[tokio::test]
async fn golden_malformed_bodies() {
    assert_eq!(check_golden("malformed.json").await, Vec::<String>::new());
}

#[tokio::test]
async fn media_is_attached_to_music_and_routes() {
    let app = server(None);
    for turn in ["coffee", "play Stan"] {
        say(&app, "car", turn).await;
    }
    let (_, body) = say(&app, "car", "yes").await;
    assert_eq!(
        body,
        serde_json::json!([{
            "recipient_id": "car",
            "text": "Now playing Stan by Eminem.",
            "media": { "kind": "track", "ref": "trk-003" }
        }])
    );
    say(&app, "car", "navigate to New York").await;
    let (_, body) = say(&app, "car", "yes").await;
    assert_eq!(body[0]["text"], "Route to New York from Bangalore: 12.4 km, about 31 min.");
    assert_eq!(body[0]["media"], serde_json::json!({ "kind": "route", "ref": "map:bangalore-new-york" }));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 8)]
async fn concurrent_senders_match_serial_execution() {
    const SENDERS: usize = 50;
    let serial = run_serial(&server(None), SENDERS).await;
    let concurrent = run_concurrent(&server(None), SENDERS).await;
    assert_eq!(serial.len(), SENDERS);
    assert!(serial.iter().all(|t| t.len() == 10));
    for (i, (a, b)) in serial.iter().zip(&concurrent).enumerate() {
        assert_eq!(a, b, "sender {i}");
    }
}

#[tokio::test]
async fn health_reports_the_model_fingerprint() {
    let app = server(None);
    let res = app.oneshot(Request::get("/health").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let body: serde_json::Value = serde_json::from_slice(&res.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(body, serde_json::json!({ "status": "ok", "model_fingerprint": model().fingerprint() }));
    assert_eq!(model().fingerprint().len(), 64);
}

#[tokio::test]
async fn cors_preflight_is_allowed() {
    let app = server(None);
    let req = Request::options("/webhooks/rest/webhook")
        .header("origin", "http://localhost:3000")
        .header("access-control-request-method", "POST")
        .header("access-control-request-headers", "content-type")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert!(res.status().is_success());
    assert_eq!(res.headers()["access-control-allow-origin"], "*");
}

#[tokio::test]
async fn console_directory_is_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>console</h1>").unwrap();
    let app = server(Some(dir.path()));
    let res = app.clone().oneshot(Request::get("/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(&res.into_body().collect().await.unwrap().to_bytes()[..], b"<h1>console</h1>");
    // The API still takes precedence.
    let (status, _) = say(&app, "car", "coffee").await;
    assert_eq!(status, StatusCode::OK);
    // Without a console nothing else is routed.
    let res = server(None).oneshot(Request::get("/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::NOT_FOUND);
}

#[test]
fn repl_transcript_matches_golden() {
    let engine = app::build_engine(model(), &vehicle_fixtures(), StageDelays::default()).unwrap();
    let store = app::open_store(engine.spec(), None).unwrap();
    let assistant = app::build_assistant(engine, store, VEHICLE_WAKE_WORD).unwrap();
    let mut out = Vec::new();
    run_repl(&assistant, "driver", "coffee\nhello\n/quit\nhello\n".as_bytes(), &mut out).unwrap();
    let want = std::fs::read_to_string(golden_dir().join("repl_transcript.txt")).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), want);
}

#[test]
fn conversations_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let open = || {
        let engine = app::build_engine(model(), &vehicle_fixtures(), StageDelays::default()).unwrap();
        let store = app::open_store(engine.spec(), Some(dir.path())).unwrap();
        app::build_assistant(engine, store, VEHICLE_WAKE_WORD).unwrap()
    };
    let first = open();
    first.handle("car", "coffee").unwrap();
    first.handle("car", "what's the weather").unwrap();
    drop(first);
    let second = open();
    let replies = second.handle("car", "Mumbai").unwrap();
    assert_eq!(replies[0].text, "Did you say Mumbai?");
}

#[test]
fn multi_word_wake_words_are_rejected() {
    let engine = app::build_engine(model(), &vehicle_fixtures(), StageDelays::default()).unwrap();
    let store = app::open_store(engine.spec(), None).unwrap();
    assert!(app::build_assistant(engine, store, "hey car").is_err());
}
