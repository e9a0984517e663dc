//! HTTP/JSON front end for the command loop: sessions, commands,
//! disambiguation and state inspection.

mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use uniact_core::catalog::Catalog;
use uniact_core::resolver::Resolution;
use uniact_core::session::{
    AppSummary, ChooseCandidate, CommandOutcome, CreateSession, ErrorBody, Runtime, SessionError, SessionSummary,
    StateView, SubmitCommand, TranscriptEntry,
};

pub use store::{SessionStore, DEFAULT_IDLE_TIMEOUT};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub idle_timeout: Duration,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            cors_origin: None,
        }
    }
}

#[derive(Clone)]
pub struct AppContext {
    pub store: Arc<SessionStore>,
    pub runtime: Arc<Runtime>,
}

impl AppContext {
    pub fn new(catalog: Catalog, runtime: Runtime, idle_timeout: Duration) -> Self {
        AppContext {
            store: Arc::new(SessionStore::new(catalog, idle_timeout)),
            runtime: Arc::new(runtime),
        }
    }
}

pub enum ApiError {
    Session(SessionError),
    BadRequest(String),
    Internal(String),
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError::Session(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Session(e) => {
                let status = match e {
                    SessionError::UnknownApp(_) | SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
                    SessionError::PendingChoice | SessionError::NoPending => StatusCode::CONFLICT,
                    SessionError::IndexOutOfRange { .. } => StatusCode::BAD_REQUEST,
                };
                (status, e.body())
            }
            ApiError::BadRequest(error) => (
                StatusCode::BAD_REQUEST,
                ErrorBody {
                    error,
                    code: "BadRequest".into(),
                },
            ),
            ApiError::Internal(error) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error,
                    code: "Internal".into(),
                },
            ),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Serialize)]
struct Health {
    status: &'static str,
    sessions: usize,
}

async fn health(State(ctx): State<AppContext>) -> Json<Health> {
    Json(Health {
        status: "ok",
        sessions: ctx.store.len(),
    })
}

async fn list_apps(State(ctx): State<AppContext>) -> Json<Vec<AppSummary>> {
    Json(ctx.store.catalog().apps().map(|a| AppSummary::of(a)).collect())
}

async fn create_session(
    State(ctx): State<AppContext>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionSummary>), ApiError> {
    let Json(req) = body?;
    let session = ctx.store.create(&req.app)?;
    let summary = session.lock().await.summary();
    tracing::info!(id = %summary.id, app = %summary.app, "session created");
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn delete_session(State(ctx): State<AppContext>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    ctx.store.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn session_state(State(ctx): State<AppContext>, Path(id): Path<String>) -> ApiResult<StateView> {
    let session = ctx.store.get(&id)?;
    let view = session.lock().await.view();
    Ok(Json(view))
}

async fn transcript(State(ctx): State<AppContext>, Path(id): Path<String>) -> ApiResult<Vec<TranscriptEntry>> {
    let session = ctx.store.get(&id)?;
    let entries = session.lock().await.transcript().to_vec();
    Ok(Json(entries))
}

async fn submit_command(
    State(ctx): State<AppContext>,
    Path(id): Path<String>,
    body: Result<Json<SubmitCommand>, JsonRejection>,
) -> ApiResult<CommandOutcome> {
    let Json(req) = body?;
    let session = ctx.store.get(&id)?;
    // Holding the lock across the blocking call is what serializes commands
    // within one session; other sessions are unaffected.
    let mut guard = session.lock_owned().await;
    let runtime = ctx.runtime.clone();
    let outcome = tokio::task::spawn_blocking(move || guard.submit(&req.nlc, &runtime))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(outcome))
}

async fn choose(
    State(ctx): State<AppContext>,
    Path(id): Path<String>,
    body: Result<Json<ChooseCandidate>, JsonRejection>,
) -> ApiResult<CommandOutcome> {
    let Json(req) = body?;
    let session = ctx.store.get(&id)?;
    let outcome = session.lock().await.choose(req.index, &ctx.runtime)?;
    Ok(Json(outcome))
}

/// Stateless resolution against an app, without executing anything.
async fn resolve_only(
    State(ctx): State<AppContext>,
    Path(app): Path<String>,
    body: Result<Json<SubmitCommand>, JsonRejection>,
) -> ApiResult<Resolution> {
    let Json(req) = body?;
    let bundle = ctx
        .store
        .catalog()
        .app(&app)
        .map_err(|_| SessionError::UnknownApp(app.clone()))?
        .clone();
    let runtime = ctx.runtime.clone();
    let resolution = tokio::task::spawn_blocking(move || {
        uniact_core::resolve(
            &req.nlc,
            &bundle.index,
            &bundle.pairs,
            &runtime.provider,
            &runtime.config,
        )
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(resolution))
}

fn cors(origin: Option<&str>) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(value) => layer.allow_origin(AllowOrigin::exact(value)),
        None => layer.allow_origin(Any),
    }
}

pub fn router(ctx: AppContext, cors_origin: Option<&str>) -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/apps", get(list_apps))
        .route("/apps/{app}/resolve", post(resolve_only))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/command", post(submit_command))
        .route("/sessions/{id}/choose", post(choose))
        .route("/sessions/{id}/transcript", get(transcript))
        .layer(cors(cors_origin))
        .with_state(ctx)
}

/// Periodically drops idle sessions until the process exits.
pub fn spawn_evictor(store: Arc<SessionStore>) -> tokio::task::JoinHandle<()> {
    let period = (store.idle_timeout() / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let gone = store.evict_idle(Instant::now());
            if gone > 0 {
                tracing::info!(gone, "evicted idle sessions");
            }
        }
    })
}

/// Binds `config.bind` and serves until the future is dropped.
pub async fn serve(config: ServiceConfig, catalog: Catalog, runtime: Runtime) -> std::io::Result<()> {
    let listener = TcpListener::bind(config.bind).await?;
    serve_on(listener, config, catalog, runtime).await
}

pub async fn serve_on(
    listener: TcpListener,
    config: ServiceConfig,
    catalog: Catalog,
    runtime: Runtime,
) -> std::io::Result<()> {
    let ctx = AppContext::new(catalog, runtime, config.idle_timeout);
    spawn_evictor(ctx.store.clone());
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(ctx, config.cors_origin.as_deref())).await
}
