//! Local HTTP service for interactive parameter tuning.
//!
//! Renders for the same mesh are never interleaved: a second request for a
//! mesh that is still rendering gets `409 Conflict`.

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine as _;
use inkshade::geometry::{Camera, DirectionalLight, Mesh};
use inkshade::pipeline::{
    params_schema, render_prepared, OutputKind, PreparedMesh, RenderFrame, RenderOptions, RenderStats,
    StyleParams, Timings,
};
use inkshade::stylemetrics::{style_report, PoleScene};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::scene::{load_path, pole_scene, CameraSpec, FixtureKind, Orbit};

const POLE_KEY: &str = "fixture:pole";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Timing record of the most recent completed render.
#[derive(Debug, Clone, Serialize)]
pub struct LastRender {
    pub mesh: String,
    pub timings: Timings,
    pub stats: RenderStats,
}

#[derive(Debug)]
pub struct AppState {
    mesh_dir: PathBuf,
    meshes: Mutex<HashMap<String, Arc<PreparedMesh<f64>>>>,
    busy: Mutex<HashSet<String>>,
    last: Mutex<Option<LastRender>>,
}

/// Marks a mesh as rendering until dropped.
#[derive(Debug)]
pub struct BusyGuard {
    state: Arc<AppState>,
    key: String,
}

impl Drop for BusyGuard {
    fn drop(&mut self) {
        lock(&self.state.busy).remove(&self.key);
    }
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    pub fn new(mesh_dir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            mesh_dir: mesh_dir.into(),
            meshes: Mutex::new(HashMap::new()),
            busy: Mutex::new(HashSet::new()),
            last: Mutex::new(None),
        })
    }

    /// File names of the `.obj` and `.ply` files in the mesh directory,
    /// sorted.
    pub fn mesh_ids(&self) -> std::io::Result<Vec<String>> {
        let mut ids: Vec<String> = std::fs::read_dir(&self.mesh_dir)?
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|name| {
                let lower = name.to_ascii_lowercase();
                lower.ends_with(".obj") || lower.ends_with(".ply")
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Claim `key` for a render, or `None` when one is already running.
    pub fn try_begin(self: &Arc<Self>, key: &str) -> Option<BusyGuard> {
        lock(&self.busy).insert(key.to_string()).then(|| BusyGuard {
            state: Arc::clone(self),
            key: key.to_string(),
        })
    }

    fn prepared(&self, id: &str) -> Result<Arc<PreparedMesh<f64>>, ApiError> {
        let ids = self
            .mesh_ids()
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("cannot list meshes: {e}")))?;
        if !ids.iter().any(|i| i == id) {
            return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown mesh '{id}'")));
        }
        if let Some(p) = lock(&self.meshes).get(id) {
            return Ok(Arc::clone(p));
        }
        let mesh = load_path(&self.mesh_dir.join(id))
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        let prepared = Arc::new(
            PreparedMesh::new(mesh).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?,
        );
        lock(&self.meshes).insert(id.to_string(), Arc::clone(&prepared));
        Ok(prepared)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/meshes", get(list_meshes))
        .route("/api/params/schema", get(schema))
        .route("/api/render", post(render))
        .route("/api/last-timings", get(last_timings))
        .route("/api/metrics", post(metrics))
        .with_state(state)
}

async fn list_meshes(State(state): State<Arc<AppState>>) -> Result<Json<Vec<String>>, ApiError> {
    state
        .mesh_ids()
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("cannot list meshes: {e}")))
}

async fn schema() -> Json<Value> {
    Json(json!({ "fields": params_schema() }))
}

async fn last_timings(State(state): State<Arc<AppState>>) -> Result<Json<LastRender>, ApiError> {
    lock(&state.last)
        .clone()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "no render has completed yet"))
}

/// Request body shared by `/api/render` and `/api/metrics`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestShape {
    #[serde(default)]
    mesh: Option<String>,
    #[serde(default)]
    camera: Option<CameraSpec>,
    #[serde(default)]
    outputs: Vec<OutputKind>,
    #[serde(default)]
    fixture: FixtureKind,
}

struct Job {
    key: String,
    prepared: Arc<PreparedMesh<f64>>,
    camera: Camera<f64>,
    params: StyleParams,
    outputs: Vec<OutputKind>,
    pole: Option<inkshade::fixtures::PoleFixture>,
}

fn parse_request(state: &AppState, body: &[u8]) -> Result<Job, ApiError> {
    let mut doc: Value =
        serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| ApiError::bad_request("request must be a JSON object"))?;
    let params = match obj.remove("params") {
        None | Some(Value::Null) => StyleParams::default(),
        Some(v) => StyleParams::from_value(v).map_err(|e| ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": e.to_string(), "violations": e.violations() }),
        })?,
    };
    let shape: RequestShape =
        serde_json::from_value(doc).map_err(|e| ApiError::bad_request(format!("invalid request: {e}")))?;
    let invalid_camera = |e: crate::scene::SceneError| ApiError {
        status: StatusCode::BAD_REQUEST,
        body: json!({
            "error": e.to_string(),
            "violations": [{ "field": "camera", "message": e.to_string() }],
        }),
    };
    let outputs = if shape.outputs.is_empty() {
        vec![OutputKind::Final]
    } else {
        shape.outputs
    };
    match shape.fixture {
        FixtureKind::Pole => {
            if shape.mesh.is_some() || shape.camera.is_some() {
                return Err(ApiError::bad_request("the pole fixture uses its own mesh and camera"));
            }
            let o = Orbit::default();
            let (fx, mesh, camera) = pole_scene(o.width, o.height);
            let prepared = {
                let mut cache = lock(&state.meshes);
                let entry = cache.entry(POLE_KEY.to_string());
                Arc::clone(entry.or_insert_with(|| Arc::new(PreparedMesh::new(mesh).expect("pole fixture is valid"))))
            };
            Ok(Job {
                key: POLE_KEY.into(),
                prepared,
                camera,
                params,
                outputs,
                pole: Some(fx),
            })
        }
        FixtureKind::None => {
            let id = shape.mesh.ok_or_else(|| ApiError::bad_request("missing field 'mesh'"))?;
            let prepared = state.prepared(&id)?;
            let camera = shape
                .camera
                .unwrap_or_default()
                .resolve(prepared.mesh())
                .map_err(invalid_camera)?;
            Ok(Job {
                key: id,
                prepared,
                camera,
                params,
                outputs,
                pole: None,
            })
        }
    }
}

/// Run a job on the blocking pool while holding its busy flag.
async fn run_job(state: &Arc<AppState>, job: &Arc<Job>) -> Result<RenderFrame<f64>, ApiError> {
    let guard = state
        .try_begin(&job.key)
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, format!("a render for '{}' is in flight", job.key)))?;
    let work = Arc::clone(job);
    let frame = tokio::task::spawn_blocking(move || {
        render_prepared(&work.prepared, &work.camera, &work.params, RenderOptions::default())
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    drop(guard);
    *lock(&state.last) = Some(LastRender {
        mesh: job.key.clone(),
        timings: frame.timings.clone(),
        stats: frame.stats,
    });
    Ok(frame)
}

async fn render(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let job = Arc::new(parse_request(&state, &body)?);
    let frame = run_job(&state, &job).await?;
    let millis = HeaderValue::from_str(&format!("{:.3}", frame.timings.total_ms)).expect("numeric header");
    let encode = |kind| {
        frame
            .output_png(kind)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
    };
    let mut response = if let [kind] = job.outputs.as_slice() {
        ([(header::CONTENT_TYPE, "image/png")], encode(*kind)?).into_response()
    } else {
        let mut images = serde_json::Map::new();
        for &kind in &job.outputs {
            let name = serde_json::to_value(kind).expect("output name");
            let data = base64::engine::general_purpose::STANDARD.encode(encode(kind)?);
            images.insert(name.as_str().unwrap_or_default().to_string(), Value::String(data));
        }
        Json(json!({ "images": images })).into_response()
    };
    response.headers_mut().insert("x-render-millis", millis);
    Ok(response)
}

async fn metrics(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let job = Arc::new(parse_request(&state, &body)?);
    let frame = run_job(&state, &job).await?;
    let mesh: &Mesh<f64> = job.prepared.mesh();
    let report = match &job.pole {
        Some(fx) => {
            let light = DirectionalLight::from_angles(job.params.light_azimuth_deg, job.params.light_elevation_deg)
                .map_err(|e| ApiError::bad_request(e.to_string()))?;
            let scene = PoleScene {
                fixture: fx,
                mesh,
                camera: &job.camera,
                light: &light,
            };
            style_report(&frame, &job.params, Some(scene))
        }
        None => style_report(&frame, &job.params, None),
    }
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(report).into_response())
}

/// Bind and serve until the process is stopped.
pub async fn serve(host: &str, port: u16, mesh_dir: PathBuf) -> std::io::Result<()> {
    if !mesh_dir.is_dir() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("mesh directory {} does not exist", mesh_dir.display()),
        ));
    }
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(mesh_dir))).await
}
