//! JSON-over-HTTP API.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/ingest` | `{"corpus": "<dir>"}` |
//! | POST | `/augment` | `{"order": "forward"\|"reverse"}` (optional) |
//! | POST | `/query` | `{"query", "engine"?, "reference_time"?}` |
//! | POST | `/compare` | `{"query", "seed"?, "reference_time"?, "category"?}` |
//! | POST | `/sessions/{id}/ratings` | `{"side": "A"\|"B", "upa", "upc"}` |
//! | GET | `/memories/{id}`, `/contexts`, `/knowledge`, `/status` | |
//! | GET | `/report?format=json\|csv\|text` | |
//! | GET | `/media/{path}` | |
//!
//! Errors are `{"error": "<message>"}` with 400 (bad input), 404, 409
//! (empty store, finalized session), 502 (model misbehaved) or 503
//! (model backend unreachable). Compare responses carry the labels `A` and
//! `B` only; which engine produced which is never sent to the client.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tracing::error;

use memq_core::eval::{aggregate_report, read_log, EngineKind, QueryCategory, Rating};
use memq_core::miner::WindowOrder;
use memq_core::model::MemoryId;

use crate::engine::{now, BlindedAnswer, Service, ServiceError};
use crate::sessions::{RatingStatus, SessionBook, SessionError, Side};

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<Service>,
    pub sessions: Arc<Mutex<SessionBook>>,
}

impl AppState {
    pub fn new(service: Arc<Service>, sessions: SessionBook) -> Self {
        Self {
            service,
            sessions: Arc::new(Mutex::new(sessions)),
        }
    }
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::Conflict(_) => StatusCode::CONFLICT,
            Self::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            Self::Upstream(_) => StatusCode::BAD_GATEWAY,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            error!(%status, "{self}");
        }
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

impl From<SessionError> for ServiceError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NotFound(_) => Self::NotFound(e.to_string()),
            SessionError::Finalized(_) => Self::Conflict(e.to_string()),
            SessionError::Log(_) => Self::Internal(e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ServiceError>;

/// Bodies are parsed by hand so that malformed input is a 400 with a
/// readable message. An empty body reads as `{}`.
fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let bytes: &[u8] = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        body
    };
    serde_json::from_slice(bytes)
        .map_err(|e| ServiceError::BadRequest(format!("invalid request body: {e}")))
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(format!("worker failed: {e}")))?
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/ingest", post(ingest))
        .route("/augment", post(augment))
        .route("/query", post(query))
        .route("/compare", post(compare))
        .route("/sessions/{id}/ratings", post(rate))
        .route("/memories/{id}", get(memory))
        .route("/contexts", get(contexts))
        .route("/knowledge", get(knowledge))
        .route("/status", get(status))
        .route("/report", get(report))
        .route("/media/{*path}", get(media))
        .with_state(state)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IngestBody {
    corpus: PathBuf,
}

async fn ingest(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: IngestBody = parse(&body)?;
    let service = state.service.clone();
    let summary = blocking(move || service.ingest(&body.corpus)).await?;
    Ok(Json(summary).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AugmentBody {
    #[serde(default)]
    order: WindowOrder,
}

async fn augment(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: AugmentBody = parse(&body)?;
    let service = state.service.clone();
    let report = blocking(move || service.augment(body.order)).await?;
    Ok(Json(report).into_response())
}

#[derive(Deserialize)]
struct QueryBody {
    query: String,
    #[serde(default)]
    engine: Option<String>,
    #[serde(default)]
    reference_time: Option<DateTime<Utc>>,
}

async fn query(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: QueryBody = parse(&body)?;
    let engine = match body.engine.as_deref() {
        None => EngineKind::Augmented,
        Some(name) => name.parse().map_err(ServiceError::BadRequest)?,
    };
    let service = state.service.clone();
    let response =
        blocking(move || service.query(engine, &body.query, body.reference_time)).await?;
    Ok(Json(response).into_response())
}

#[derive(Deserialize)]
struct CompareBody {
    query: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    reference_time: Option<DateTime<Utc>>,
    #[serde(default)]
    category: Option<QueryCategory>,
}

#[derive(Serialize)]
struct CompareResponse {
    session_id: String,
    query: String,
    reference_time: DateTime<Utc>,
    answers: [BlindedAnswer; 2],
}

async fn compare(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: CompareBody = parse(&body)?;
    let reference_time = body.reference_time.unwrap_or_else(now);
    let service = state.service.clone();
    let q = body.query.clone();
    let (augmented, baseline) = blocking(move || {
        let augmented = service.query(EngineKind::Augmented, &q, Some(reference_time))?;
        let baseline = service.query(EngineKind::Baseline, &q, Some(reference_time))?;
        Ok((augmented, baseline))
    })
    .await?;

    let mut book = state.sessions.lock().expect("session lock poisoned");
    let assignment = book.assign(body.seed);
    let (a, b) = match assignment.a {
        EngineKind::Augmented => (&augmented, &baseline),
        EngineKind::Baseline => (&baseline, &augmented),
    };
    let answers = [a.blinded("A"), b.blinded("B")];
    let session_id = book.start(
        &augmented.query,
        body.category,
        assignment,
        augmented.to_answer(),
        baseline.to_answer(),
        now(),
    );
    Ok(Json(CompareResponse {
        session_id,
        query: augmented.query,
        reference_time,
        answers,
    })
    .into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingBody {
    side: Side,
    upa: u8,
    upc: u8,
}

async fn rate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let body: RatingBody = parse(&body)?;
    let rating =
        Rating::new(body.upa, body.upc).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    let sessions = state.sessions.clone();
    // Finalizing writes the log, so the lock is taken off the runtime.
    let status = blocking(move || {
        let mut book = sessions.lock().expect("session lock poisoned");
        Ok(book.rate(&id, body.side, rating, now())?)
    })
    .await?;
    let body = match status {
        RatingStatus::Awaiting(side) => json!({ "finalized": false, "awaiting": side }),
        RatingStatus::Finalized(record) => {
            json!({ "finalized": true, "session_id": record.session_id })
        }
    };
    Ok(Json(body).into_response())
}

async fn memory(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let detail = state.service.memory(&MemoryId::new(id))?;
    Ok(Json(detail).into_response())
}

async fn contexts(State(state): State<AppState>) -> Response {
    Json(state.service.contexts()).into_response()
}

async fn knowledge(State(state): State<AppState>) -> Response {
    Json(state.service.knowledge()).into_response()
}

async fn status(State(state): State<AppState>) -> Response {
    Json(state.service.status()).into_response()
}

#[derive(Deserialize)]
struct ReportParams {
    #[serde(default)]
    format: Option<String>,
}

async fn report(
    State(state): State<AppState>,
    Query(params): Query<ReportParams>,
) -> ApiResult<Response> {
    let log = state
        .sessions
        .lock()
        .expect("session lock poisoned")
        .log_path()
        .to_path_buf();
    let records = blocking(move || {
        read_log(&log).map_err(|e| ServiceError::Internal(e.to_string()))
    })
    .await?;
    let report = aggregate_report(&records);
    match params.format.as_deref().unwrap_or("json") {
        "json" => Ok(Json(report).into_response()),
        "csv" => Ok(([(header::CONTENT_TYPE, "text/csv")], report.to_csv()).into_response()),
        "text" => Ok((
            [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
            report.to_text(),
        )
            .into_response()),
        other => Err(ServiceError::BadRequest(format!(
            "unknown report format {other:?} (expected json, csv or text)"
        ))),
    }
}

fn content_type(path: &std::path::Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("mp4") => "video/mp4",
        Some("mov") => "video/quicktime",
        _ => "application/octet-stream",
    }
}

async fn media(State(state): State<AppState>, Path(path): Path<String>) -> ApiResult<Response> {
    let file = state.service.media_file(&path)?;
    let bytes = tokio::fs::read(&file)
        .await
        .map_err(|_| ServiceError::NotFound(format!("no media at {path}")))?;
    Ok(([(header::CONTENT_TYPE, content_type(&file))], bytes).into_response())
}
