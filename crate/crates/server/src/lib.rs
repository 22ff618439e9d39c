//! HTTP session API over a loaded model bundle.
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | POST | `/api/session` | | `{session_id}` |
//! | GET | `/api/keywords` | | `{clusters: [{cluster_id, keywords}]}` |
//! | POST | `/api/session/{id}/questionnaire` | `{keywords}` | `{target_clusters}` |
//! | GET | `/api/session/{id}/recommendations` | | `{bets, wildcard, seed}` |
//! | POST | `/api/session/{id}/feedback` | `{wine_id, verdict}` | `{history_size}` |
//!
//! Errors carry a `{code, message}` body. With a static directory configured,
//! every other path is served from it.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use sommelier::recommend::{Verdict, WineId};
use sommelier::service::{RecommendationView, SessionError, SessionManager};
use sommelier::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
            },
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message),
            SessionError::NotReady => ApiError::new(StatusCode::CONFLICT, "not_ready", message),
            SessionError::Core(core) => match core {
                Error::UnknownWine(_) | Error::InvalidArgument { .. } => {
                    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", message)
                }
                Error::NoMatchingPalate | Error::NoKnownKeywords => {
                    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_matching_palate", message)
                }
                Error::InsufficientCandidates { .. } => {
                    ApiError::new(StatusCode::CONFLICT, "insufficient_candidates", message)
                }
                _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(e.status(), "bad_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterKeywords {
    pub cluster_id: usize,
    pub keywords: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KeywordList {
    pub clusters: Vec<ClusterKeywords>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Questionnaire {
    pub keywords: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QuestionnaireAck {
    pub target_clusters: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Feedback {
    pub wine_id: WineId,
    pub verdict: Verdict,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeedbackAck {
    pub history_size: usize,
}

type Shared = Arc<SessionManager>;

/// Runs a session operation off the async executor; recommendation rounds
/// can be CPU-heavy on large corpora.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn create_session(State(mgr): State<Shared>) -> (StatusCode, Json<SessionCreated>) {
    let session = mgr.create_session();
    log::info!("created session {}", session.session_id);
    (
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: session.session_id,
        }),
    )
}

async fn keywords(State(mgr): State<Shared>) -> Json<KeywordList> {
    let clusters = mgr
        .model()
        .keyword_table()
        .iter()
        .enumerate()
        .map(|(cluster_id, k)| ClusterKeywords {
            cluster_id,
            keywords: k.clone(),
        })
        .collect();
    Json(KeywordList { clusters })
}

async fn questionnaire(
    State(mgr): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<Questionnaire>, JsonRejection>,
) -> ApiResult<QuestionnaireAck> {
    let Json(q) = body?;
    let target_clusters = blocking(move || mgr.submit_questionnaire(&id, &q.keywords)).await?;
    Ok(Json(QuestionnaireAck { target_clusters }))
}

async fn recommendations(State(mgr): State<Shared>, Path(id): Path<String>) -> ApiResult<RecommendationView> {
    let view = blocking(move || {
        let set = mgr.get_recommendations(&id)?;
        log::info!("session {id}: served round with seed {}", set.seed);
        Ok(mgr.model().view(&set))
    })
    .await?;
    Ok(Json(view))
}

async fn feedback(
    State(mgr): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<Feedback>, JsonRejection>,
) -> ApiResult<FeedbackAck> {
    let Json(f) = body?;
    let history_size = blocking(move || mgr.submit_feedback(&id, f.wine_id, f.verdict)).await?;
    Ok(Json(FeedbackAck { history_size }))
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

/// The API router, optionally serving a static site for all other paths.
pub fn router(sessions: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/session", post(create_session))
        .route("/keywords", get(keywords))
        .route("/session/{id}/questionnaire", post(questionnaire))
        .route("/session/{id}/recommendations", get(recommendations))
        .route("/session/{id}/feedback", post(feedback))
        .fallback(api_not_found)
        .with_state(sessions);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until ctrl-c.
pub async fn serve(sessions: Shared, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(sessions, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
