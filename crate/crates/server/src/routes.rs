use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::cors::CorsLayer;

use isostream_core::isosurface::{suggest_isovalues, DEFAULT_OFFSET_FRACTION, DEFAULT_OPACITY};
use isostream_core::scoring::Camera;
use isostream_core::selection::SelectionConfig;
use isostream_core::topology::{CriticalCounts, CriticalKind, CriticalPoint};
use isostream_core::tracing::{StreamlineRecord, TraceOverrides};
use isostream_core::volume::{load_svf, parse_svf};

use crate::{AppState, ApiError, Session, BODY_LIMIT};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(delete_session))
        .route("/sessions/{id}/isosurfaces", post(add_isosurface))
        .route("/sessions/{id}/candidates", post(build_candidates))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/geometry", get(geometry))
        .route("/sessions/{id}/criticalpoints", get(critical_points))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// `Json` with rejections reported in the API error format.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(ApiError::bad_request("invalid_request", e.body_text())),
        }
    }
}

/// Runs CPU-bound session work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    dataset_path: Option<String>,
    dataset_base64: Option<String>,
    scalar_field: String,
    vector_field: String,
}

#[derive(Serialize)]
struct SessionCreated {
    session_id: String,
    dims: [usize; 3],
    field_names: Vec<String>,
    cp_counts: CriticalCounts,
}

async fn create_session(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<CreateSession>,
) -> Result<Json<SessionCreated>, ApiError> {
    let session = blocking(move || {
        let grid = match (req.dataset_path, req.dataset_base64) {
            (Some(path), None) => load_svf(path)?,
            (None, Some(b64)) => {
                let bytes = base64::engine::general_purpose::STANDARD
                    .decode(b64.trim())
                    .map_err(|e| ApiError::bad_request("invalid_dataset", format!("base64: {e}")))?;
                parse_svf(&bytes)?
            }
            _ => {
                return Err(ApiError::bad_request(
                    "invalid_request",
                    "give exactly one of dataset_path and dataset_base64",
                ))
            }
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        Session::new(id, grid, req.scalar_field, req.vector_field)
    })
    .await?;
    let created = SessionCreated {
        session_id: session.id.clone(),
        dims: session.grid.dims(),
        field_names: session.grid.fields().iter().map(|f| f.name.clone()).collect(),
        cp_counts: CriticalCounts::of(&session.critical_points),
    };
    state.insert(session);
    log::info!("created session {}", created.session_id);
    Ok(Json(created))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if state.remove(&id) {
        log::info!("deleted session {id}");
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(&id))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddIsosurface {
    isovalue: f64,
    #[serde(default = "default_opacity")]
    opacity: f64,
}

fn default_opacity() -> f64 {
    DEFAULT_OPACITY
}

async fn add_isosurface(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<AddIsosurface>,
) -> Result<Response, ApiError> {
    let session = state.get(&id)?;
    let summary = blocking(move || session.blocking_write().add_isosurface(req.isovalue, req.opacity)).await?;
    Ok(Json(summary).into_response())
}

async fn build_candidates(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(overrides): ApiJson<TraceOverrides>,
) -> Result<Response, ApiError> {
    let session = state.get(&id)?;
    let summary = blocking(move || session.blocking_write().build_candidates(&overrides)).await?;
    Ok(Json(summary).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectRequest {
    camera: Camera,
    #[serde(default)]
    selection: SelectionConfig,
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<SelectRequest>,
) -> Result<Response, ApiError> {
    let session = state.get(&id)?;
    let result = blocking(move || session.blocking_read().select(&req.camera, &req.selection)).await?;
    Ok(Json(result).into_response())
}

async fn read_session<T: Send + 'static>(
    session: Arc<RwLock<Session>>,
    f: impl FnOnce(&Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    blocking(move || f(&session.blocking_read())).await
}

async fn geometry(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<Value>, ApiError> {
    let session = state.get(&id)?;
    let what = query
        .get("what")
        .cloned()
        .ok_or_else(|| ApiError::bad_request("invalid_request", "missing query parameter `what`"))?;
    let body = read_session(session, move |s| {
        let v = match what.as_str() {
            "meshes" => serde_json::to_value(&s.meshes),
            "streamlines" => {
                serde_json::to_value(s.candidates.iter().map(StreamlineRecord::from).collect::<Vec<_>>())
            }
            "critical_points" => serde_json::to_value(&s.critical_points),
            "selection" => serde_json::to_value(s.last_selection()),
            other => {
                return Err(ApiError::bad_request(
                    "invalid_request",
                    format!("unknown geometry {other:?}; expected meshes, streamlines, critical_points or selection"),
                ))
            }
        };
        v.map_err(|e| ApiError::internal(e.to_string()))
    })
    .await?;
    Ok(Json(body))
}

async fn critical_points(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = state.get(&id)?;
    read_session(session, |s| {
        let scalar: Vec<CriticalPoint> =
            s.critical_points.iter().filter(|c| c.kind != CriticalKind::VectorZero).cloned().collect();
        let range = s.grid.scalar(&s.scalar_field)?.range();
        let suggestions = suggest_isovalues(&scalar, DEFAULT_OFFSET_FRACTION, range)?;
        Ok(Json(json!({ "critical_points": s.critical_points, "suggestions": suggestions })))
    })
    .await
}
