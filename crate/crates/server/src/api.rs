//! HTTP routes.
//!
//! Clustering and refinement state lives in the store; selections are sent
//! with every request and never stored.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use tempo_core::clustering::{cluster_scan, ClusterConfig, ClusterId, ClusterModel};
use tempo_core::layout::{compute_layout, LayoutRequest};
use tempo_core::render_svg::{render, RenderConfig};
use tempo_core::selection::{evaluate, parameter_footprint, ParameterRange, SelectionState};
use tempo_core::simgen::{generate_scan, GridSpec};
use tempo_core::{emit_scan, parse_scan, ParameterScan, ScanFileFormat};

use crate::error::ApiError;
use crate::store::{Session, SessionStore};

pub const DEFAULT_BODY_LIMIT: usize = 64 * 1024 * 1024;
pub const DEFAULT_CLUSTER_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub body_limit: usize,
    pub cluster_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            body_limit: DEFAULT_BODY_LIMIT,
            cluster_timeout: DEFAULT_CLUSTER_TIMEOUT,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub config: ServerConfig,
}

pub fn router(store: Arc<SessionStore>, config: ServerConfig) -> Router {
    let limit = config.body_limit;
    Router::new()
        .route("/scans", get(list_scans).post(upload_scan))
        .route("/scans/generate", post(generate))
        .route("/scans/{id}", get(get_scan))
        .route("/scans/{id}/cluster", get(get_clusters).post(cluster))
        .route("/scans/{id}/cluster/refine", post(refine))
        .route("/scans/{id}/layout", post(layout))
        .route("/scans/{id}/selection/evaluate", post(evaluate_selection))
        .route("/scans/{id}/render", post(render_svg))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(limit))
        .with_state(AppState { store, config })
}

/// Request body whose rejections are reported as structured errors.
pub struct Body(pub Bytes);

impl<S: Send + Sync> FromRequest<S> for Body {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Bytes::from_request(req, state)
            .await
            .map(Body)
            .map_err(|r| ApiError::new(r.status(), "payload_rejected", r.body_text()))
    }
}

impl Body {
    /// Parses JSON; an empty body means the type's default.
    fn json<T: DeserializeOwned + Default>(&self) -> Result<T, ApiError> {
        if self.0.iter().all(u8::is_ascii_whitespace) {
            return Ok(T::default());
        }
        serde_json::from_slice(&self.0).map_err(ApiError::bad_json)
    }

    fn json_required<T: DeserializeOwned>(&self) -> Result<T, ApiError> {
        serde_json::from_slice(&self.0).map_err(ApiError::bad_json)
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let body = serde_json::to_vec(value).expect("response types serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn session(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    state.store.get(id).ok_or_else(|| ApiError::not_found("scan", id))
}

fn require_model(model: Option<Arc<ClusterModel>>, id: &str) -> Result<Arc<ClusterModel>, ApiError> {
    model.ok_or_else(|| {
        ApiError::new(StatusCode::CONFLICT, "not_clustered", format!("scan '{id}' has no cluster model yet"))
            .with_detail(json!({ "scan_id": id }))
    })
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scan_id: String,
    /// Identifier carried inside the scan itself.
    pub source_id: String,
    pub runs: usize,
    pub parameters: Vec<String>,
    pub observables: Vec<String>,
    pub time_grid: Vec<f64>,
}

impl ScanSummary {
    pub fn of(id: &str, scan: &ParameterScan) -> Self {
        Self {
            scan_id: id.to_string(),
            source_id: scan.scan_id.clone(),
            runs: scan.runs.len(),
            parameters: scan.parameter_schema.names().map(str::to_string).collect(),
            observables: scan.observable_schema.names().map(str::to_string).collect(),
            time_grid: scan.time_grid().to_vec(),
        }
    }
}

async fn list_scans(State(state): State<AppState>) -> Response {
    let summaries: Vec<ScanSummary> = state
        .store
        .ids()
        .iter()
        .filter_map(|id| state.store.get(id).map(|s| ScanSummary::of(id, &s.snapshot().scan)))
        .collect();
    json_response(StatusCode::OK, &summaries)
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn upload_scan(
    State(state): State<AppState>,
    Query(q): Query<FormatQuery>,
    body: Body,
) -> Result<Response, ApiError> {
    let format: ScanFileFormat = match q.format.as_deref() {
        None => ScanFileFormat::Json,
        Some(name) => name.parse().map_err(|e: tempo_core::IngestError| {
            ApiError::new(StatusCode::BAD_REQUEST, "unknown_format", e.to_string())
                .with_detail(json!({ "accepted": ["long-csv", "wide-csv", "json"] }))
        })?,
    };
    let scan = parse_scan(&body.0, format)?;
    let summary_scan = scan.clone();
    let id = state.store.insert(scan).map_err(internal)?;
    Ok(json_response(StatusCode::CREATED, &ScanSummary::of(&id, &summary_scan)))
}

/// Body of `POST /scans/generate`; the bundled demo grid when `grid` is absent.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default)]
pub struct GenerateRequest {
    pub grid: Option<GridSpec>,
    pub seed: u64,
}

async fn generate(State(state): State<AppState>, body: Body) -> Result<Response, ApiError> {
    let req: GenerateRequest = body.json()?;
    let grid = req.grid.unwrap_or_else(GridSpec::demo);
    let scan = tokio::task::spawn_blocking(move || generate_scan(&grid, req.seed))
        .await
        .map_err(internal)??;
    let summary_scan = scan.clone();
    let id = state.store.insert(scan).map_err(internal)?;
    Ok(json_response(StatusCode::CREATED, &ScanSummary::of(&id, &summary_scan)))
}

async fn get_scan(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let snap = session(&state, &id)?.snapshot();
    let body = emit_scan(&snap.scan, ScanFileFormat::Json);
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn get_clusters(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let model = require_model(session(&state, &id)?.snapshot().model, &id)?;
    Ok(json_response(StatusCode::OK, &*model))
}

async fn run_blocking<T: Send + 'static>(
    state: &AppState,
    job: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let limit = state.config.cluster_timeout;
    match tokio::time::timeout(limit, tokio::task::spawn_blocking(job)).await {
        Ok(joined) => joined.map_err(internal)?,
        Err(_) => Err(ApiError::new(
            StatusCode::GATEWAY_TIMEOUT,
            "timeout",
            format!("clustering did not finish within {} s", limit.as_secs()),
        )),
    }
}

async fn cluster(State(state): State<AppState>, Path(id): Path<String>, body: Body) -> Result<Response, ApiError> {
    let cfg: ClusterConfig = body.json()?;
    let session = session(&state, &id)?;
    let _writer = session.writer.lock().await;
    let scan = session.snapshot().scan;
    let model = run_blocking(&state, move || Ok(cluster_scan(&scan, &cfg)?)).await?;
    let model = state.store.set_model(&id, &session, model).map_err(internal)?;
    Ok(json_response(StatusCode::OK, &*model))
}

/// One refinement of the stored cluster model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RefineOp {
    Move {
        observable: String,
        run_ids: Vec<String>,
        target: ClusterId,
    },
    Merge {
        observable: String,
        clusters: Vec<ClusterId>,
    },
    Split {
        observable: String,
        cluster: ClusterId,
        k: usize,
    },
}

async fn refine(State(state): State<AppState>, Path(id): Path<String>, body: Body) -> Result<Response, ApiError> {
    let op: RefineOp = body.json_required()?;
    let session = session(&state, &id)?;
    let _writer = session.writer.lock().await;
    let snap = session.snapshot();
    let current = require_model(snap.model, &id)?;
    let scan = snap.scan;
    let model = run_blocking(&state, move || {
        let next = match &op {
            RefineOp::Move { observable, run_ids, target } => {
                current.move_runs(&scan, observable, run_ids, *target)?
            }
            RefineOp::Merge { observable, clusters } => current.merge_clusters(&scan, observable, clusters)?,
            RefineOp::Split { observable, cluster, k } => {
                current.split_cluster(&scan, observable, *cluster, *k, &current.config)?
            }
        };
        Ok(next)
    })
    .await?;
    let model = state.store.set_model(&id, &session, model).map_err(internal)?;
    Ok(json_response(StatusCode::OK, &*model))
}

async fn layout(State(state): State<AppState>, Path(id): Path<String>, body: Body) -> Result<Response, ApiError> {
    let request: LayoutRequest = body.json()?;
    let session = session(&state, &id)?;
    let _writer = session.writer.lock().await;
    let snap = session.snapshot();
    let model = require_model(snap.model, &id)?;
    let layout = compute_layout(&snap.scan, &model, &request)?;
    state.store.set_layout(&session, request);
    Ok(json_response(StatusCode::OK, &layout))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub active: Vec<String>,
    pub inactive: Vec<String>,
    /// `null` when nothing is active.
    pub footprint: Option<BTreeMap<String, ParameterRange>>,
}

async fn evaluate_selection(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Body,
) -> Result<Response, ApiError> {
    let selection: SelectionState = body.json()?;
    let snap = session(&state, &id)?.snapshot();
    let model = match snap.model {
        Some(m) => m,
        None => Arc::new(ClusterModel::unclustered(&snap.scan)),
    };
    let part = evaluate(&selection, &snap.scan, &model)?;
    let footprint = if part.active.is_empty() {
        None
    } else {
        Some(parameter_footprint(&part.active, &snap.scan)?)
    };
    Ok(json_response(
        StatusCode::OK,
        &EvaluateResponse {
            active: part.active,
            inactive: part.inactive,
            footprint,
        },
    ))
}

/// Body of `POST /scans/{id}/render`; the stored layout request is used
/// when `layout` is absent.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderRequest {
    pub selection: SelectionState,
    pub config: RenderConfig,
    pub layout: Option<LayoutRequest>,
}

async fn render_svg(State(state): State<AppState>, Path(id): Path<String>, body: Body) -> Result<Response, ApiError> {
    let req: RenderRequest = body.json()?;
    let snap = session(&state, &id)?.snapshot();
    let model = require_model(snap.model, &id)?;
    let layout = compute_layout(&snap.scan, &model, req.layout.as_ref().unwrap_or(&snap.layout))?;
    let part = evaluate(&req.selection, &snap.scan, &model)?;
    let svg = render(&layout, &part, &req.config)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}
