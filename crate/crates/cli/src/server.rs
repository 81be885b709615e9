//! HTTP front end of [`SessionManager`]: one endpoint per session
//! operation, JSON in and out. See `docs/api.md` for the schemas.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use basenp_core::service::{CorpusSource, SessionManager, Which};
use basenp_core::{CorpusFormat, Error};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

type AppState = Arc<SessionManager>;

/// A JSON error body `{"error": kind, "message": text}` with its status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
    rule: Option<usize>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "bad_request",
            message: message.into(),
            rule: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            Error::NoTentative => (StatusCode::CONFLICT, "no_tentative"),
            Error::NoTestCorpus => (StatusCode::CONFLICT, "no_test_corpus"),
            Error::Range { .. } => (StatusCode::BAD_REQUEST, "range"),
            Error::RuleList { .. } | Error::Rule { .. } | Error::PatternSyntax { .. } | Error::InvalidRegex { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "rule_syntax")
            }
            Error::Io { .. } | Error::Store { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_data"),
        };
        let rule = match &e {
            Error::RuleList { index, .. } => Some(*index),
            _ => None,
        };
        ApiError {
            status,
            kind,
            message: e.to_string(),
            rule,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.kind, "message": self.message });
        if let Some(rule) = self.rule {
            body["rule"] = json!(rule);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

/// Runs a blocking session operation off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "internal",
            message: e.to_string(),
            rule: None,
        })?
        .map_err(ApiError::from)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusDoc {
    text: Option<String>,
    path: Option<PathBuf>,
    format: Option<String>,
}

impl CorpusDoc {
    fn into_source(self) -> Result<CorpusSource, ApiError> {
        match (self.text, self.path) {
            (Some(text), None) => {
                let format: CorpusFormat = match self.format {
                    Some(f) => f.parse().map_err(ApiError::bad_request)?,
                    None => CorpusFormat::Slash,
                };
                Ok(CorpusSource::Text { text, format })
            }
            (None, Some(path)) if self.format.is_none() => Ok(CorpusSource::Path(path)),
            (None, Some(_)) => Err(ApiError::bad_request("format applies to inline text only")),
            _ => Err(ApiError::bad_request("a corpus needs exactly one of text or path")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    train: CorpusDoc,
    test: Option<CorpusDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProposeRequest {
    rules: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageQuery {
    start: usize,
    end: usize,
    #[serde(default)]
    which: Which,
}

#[derive(Serialize)]
struct SessionList {
    sessions: Vec<String>,
}

async fn create(State(m): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<impl Serialize>), ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let train = req.train.into_source()?;
    let test = req.test.map(CorpusDoc::into_source).transpose()?;
    let info = blocking(move || m.create_session(&train, test.as_ref())).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list(State(m): State<AppState>) -> Json<SessionList> {
    Json(SessionList {
        sessions: m.session_ids(),
    })
}

async fn info(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    blocking(move || m.info(&id)).await.map(Json)
}

async fn propose(State(m): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl Serialize> {
    let req: ProposeRequest = parse_body(&body)?;
    blocking(move || m.propose_rules(&id, &req.rules)).await.map(Json)
}

async fn commit(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    blocking(move || m.commit(&id)).await.map(Json)
}

async fn rollback(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    blocking(move || m.rollback(&id)).await.map(Json)
}

async fn page(
    State(m): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> ApiResult<impl Serialize> {
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    blocking(move || m.view_page(&id, q.start, q.end, q.which))
        .await
        .map(Json)
}

async fn reports(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    blocking(move || m.reports(&id)).await.map(Json)
}

async fn final_report(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    blocking(move || m.final_report(&id)).await.map(Json)
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        kind: "not_found",
        message: "no such endpoint".into(),
        rule: None,
    }
}

async fn method_not_allowed() -> ApiError {
    ApiError {
        status: StatusCode::METHOD_NOT_ALLOWED,
        kind: "method_not_allowed",
        message: "method not allowed on this endpoint".into(),
        rule: None,
    }
}

pub fn router(manager: SessionManager) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(info))
        .route("/sessions/{id}/propose", post(propose))
        .route("/sessions/{id}/commit", post(commit))
        .route("/sessions/{id}/rollback", post(rollback))
        .route("/sessions/{id}/page", get(page))
        .route("/sessions/{id}/reports", get(reports))
        .route("/sessions/{id}/final", get(final_report))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(Arc::new(manager))
}

pub async fn serve(listener: tokio::net::TcpListener, manager: SessionManager) -> std::io::Result<()> {
    axum::serve(listener, router(manager)).await
}
