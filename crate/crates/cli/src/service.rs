//! HTTP editing service over a single in-memory [`Session`].
//!
//! Renders, picks and exports take a read lock and may run concurrently.
//! Reassignment, edits and undo take the write lock, so they are serialized
//! and every reader sees a complete scene.

use std::sync::{Arc, PoisonError, RwLock};

use axum::body::Body;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use splatseg_core::edit::EditOp;
use splatseg_core::scene::CameraRecord;
use splatseg_core::session::{pick_from_pixel, Pick, RenderMode, Session, SessionInfo};
use splatseg_core::{Camera, Error};

const INDEX_HTML: &str = include_str!("../static/index.html");

type SharedSession = Arc<RwLock<Session>>;

pub fn router(session: Session) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/scene/info", get(info))
        .route("/api/render", get(render))
        .route("/api/pick", post(pick))
        .route("/api/reassign", post(reassign))
        .route("/api/edit", post(edit))
        .route("/api/undo", post(undo))
        .route("/api/export", get(export))
        .with_state(Arc::new(RwLock::new(session)))
}

/// JSON error body: `{"error": <kind>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "bad_request",
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "internal",
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::NoHit { .. } => (StatusCode::NOT_FOUND, "no_hit"),
            Error::PixelOutOfBounds { .. } => (StatusCode::BAD_REQUEST, "pixel_out_of_bounds"),
            Error::Camera { .. } | Error::CameraJson(_) => (StatusCode::BAD_REQUEST, "camera"),
            Error::Config(_) => (StatusCode::BAD_REQUEST, "config"),
            Error::NotSegmented => (StatusCode::CONFLICT, "not_segmented"),
            Error::NoViews => (StatusCode::CONFLICT, "no_views"),
            Error::NothingToUndo => (StatusCode::CONFLICT, "nothing_to_undo"),
            Error::EmptyScene => (StatusCode::CONFLICT, "empty_scene"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut message = e.to_string();
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            message = format!("{message}: {s}");
            source = s.source();
        }
        ApiError {
            status,
            kind,
            message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.kind, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs `f` under the read lock on the blocking pool.
async fn read<T, F>(state: SharedSession, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Session) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&state.read().unwrap_or_else(PoisonError::into_inner)))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

/// Runs `f` under the write lock on the blocking pool.
async fn write<T, F>(state: SharedSession, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&mut state.write().unwrap_or_else(PoisonError::into_inner)))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionResponse {
    pub version: u64,
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn info(State(state): State<SharedSession>) -> ApiResult<Json<SessionInfo>> {
    read(state, |s| Ok(Json(s.info()))).await
}

#[derive(Debug, Deserialize)]
pub struct RenderQuery {
    /// Camera record as JSON.
    pub cam: String,
    #[serde(default)]
    pub mode: Option<String>,
}

fn parse_camera(json: &str) -> ApiResult<Camera> {
    let record: CameraRecord = serde_json::from_str(json).map_err(Error::from)?;
    Ok(Camera::try_from(record)?)
}

async fn render(State(state): State<SharedSession>, Query(q): Query<RenderQuery>) -> ApiResult<Response> {
    let cam = parse_camera(&q.cam)?;
    let mode: RenderMode = q.mode.as_deref().unwrap_or("rgb").parse()?;
    let png = read(state, move |s| Ok(s.render_frame(&cam, mode).to_png())).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

#[derive(Debug, Deserialize)]
pub struct PickRequest {
    pub camera: CameraRecord,
    pub pixel: [u32; 2],
    /// Neighbor count for the point query; defaults to the session's K.
    #[serde(default)]
    pub k: Option<usize>,
}

async fn pick(State(state): State<SharedSession>, Json(req): Json<PickRequest>) -> ApiResult<Json<Pick>> {
    let cam = Camera::try_from(req.camera)?;
    if req.k == Some(0) {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    read(state, move |s| {
        let k = req.k.unwrap_or(s.config().k);
        Ok(Json(pick_from_pixel(
            s.scene(),
            s.segmentation().as_ref(),
            &cam,
            req.pixel,
            k,
        )?))
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
pub struct ReassignRequest {
    #[serde(default)]
    pub gamma_p: Option<f64>,
}

async fn reassign(
    State(state): State<SharedSession>,
    Json(req): Json<ReassignRequest>,
) -> ApiResult<Json<VersionResponse>> {
    write(state, move |s| {
        let gamma_p = req.gamma_p.unwrap_or(s.config().gamma_p);
        Ok(Json(VersionResponse {
            version: s.reassign(gamma_p)?,
        }))
    })
    .await
}

async fn edit(
    State(state): State<SharedSession>,
    Json(op): Json<EditOp>,
) -> ApiResult<Json<VersionResponse>> {
    write(state, move |s| Ok(Json(VersionResponse { version: s.edit(op)? }))).await
}

async fn undo(State(state): State<SharedSession>) -> ApiResult<Json<VersionResponse>> {
    write(state, |s| Ok(Json(VersionResponse { version: s.undo()? }))).await
}

async fn export(State(state): State<SharedSession>) -> ApiResult<Response> {
    let bytes = read(state, |s| Ok(s.export())).await?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/octet-stream"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"scene.ply\""),
        ],
        Body::from(bytes),
    )
        .into_response())
}
