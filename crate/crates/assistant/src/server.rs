//! REST channel: `POST /webhooks/rest/webhook`, `GET /health`, and an
//! optional static console.

use std::path::Path;
use std::time::Duration;

use assistant_core::channel::{Assistant, ChannelMessage};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const WEBHOOK_PATH: &str = "/webhooks/rest/webhook";
pub const HEALTH_PATH: &str = "/health";
pub const DEFAULT_TURN_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone)]
pub struct ServerState {
    pub assistant: Assistant,
    pub model_fingerprint: String,
    pub turn_timeout: Duration,
}

impl ServerState {
    pub fn new(assistant: Assistant, model_fingerprint: impl Into<String>) -> Self {
        ServerState {
            assistant,
            model_fingerprint: model_fingerprint.into(),
            turn_timeout: DEFAULT_TURN_TIMEOUT,
        }
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

/// Parses the body by hand so malformed requests get a JSON 400 rather
/// than the framework's plain-text rejection.
fn parse_message(body: &[u8]) -> Result<ChannelMessage, String> {
    let msg: ChannelMessage = serde_json::from_slice(body).map_err(|e| format!("invalid request body: {e}"))?;
    if msg.sender.trim().is_empty() {
        return Err("`sender` must be a non-empty string".into());
    }
    Ok(msg)
}

async fn webhook(State(state): State<ServerState>, body: Bytes) -> Response {
    let msg = match parse_message(&body) {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    // The ticket is taken before any await so a sender's messages are
    // handled in arrival order.
    let ticket = state.assistant.ticket(&msg.sender);
    let assistant = state.assistant.clone();
    let turn = tokio::task::spawn_blocking(move || assistant.respond_with_ticket(ticket, &msg.message));
    match tokio::time::timeout(state.turn_timeout, turn).await {
        Ok(Ok(Ok((_, responses)))) => Json(responses).into_response(),
        Ok(Ok(Err(e))) => {
            tracing::error!(error = %e, "tracker store failure");
            error(StatusCode::INTERNAL_SERVER_ERROR, "tracker store failure")
        }
        Ok(Err(e)) => {
            tracing::error!(error = %e, "turn panicked");
            error(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
        Err(_) => {
            tracing::error!(timeout = ?state.turn_timeout, "turn timed out");
            error(StatusCode::INTERNAL_SERVER_ERROR, "turn timed out")
        }
    }
}

async fn health(State(state): State<ServerState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "model_fingerprint": state.model_fingerprint }))
}

/// The full HTTP surface. With `console`, files under that directory are
/// served for every other path.
pub fn router(state: ServerState, console: Option<&Path>) -> Router {
    let mut app = Router::new()
        .route(WEBHOOK_PATH, post(webhook))
        .route(HEALTH_PATH, get(health))
        .with_state(state);
    if let Some(dir) = console {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(CorsLayer::permissive())
}

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
