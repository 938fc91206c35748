use std::fmt::Write as _;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::response::Response;
use base64::Engine as _;
use http_body_util::BodyExt;
use inkshade::fixtures;
use inkshade::geometry::Mesh;
use inkshade_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn write_obj(path: &std::path::Path, mesh: &Mesh<f64>) {
    let mut s = String::new();
    for v in mesh.vertices() {
        writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

struct Fixture {
    _dir: tempfile::TempDir,
    state: Arc<AppState>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    write_obj(&dir.path().join("cube.obj"), &fixtures::cube());
    write_obj(&dir.path().join("tet.obj"), &fixtures::tetrahedron());
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    std::fs::write(dir.path().join("broken.ply"), "ply\nformat ascii 1.0\n").unwrap();
    let state = AppState::new(dir.path());
    Fixture { _dir: dir, state }
}

async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> Response {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    router(Arc::clone(state)).oneshot(req).await.unwrap()
}

async fn bytes(resp: Response) -> Vec<u8> {
    resp.into_body().collect().await.unwrap().to_bytes().to_vec()
}

async fn json_body(resp: Response) -> Value {
    serde_json::from_slice(&bytes(resp).await).unwrap()
}

fn small_camera() -> Value {
    json!({ "orbit": { "azimuth_deg": 35.0, "elevation_deg": 25.0, "width": 64, "height": 48 } })
}

fn is_png(b: &[u8]) -> bool {
    b.starts_with(b"\x89PNG\r\n\x1a\n")
}

#[tokio::test]
async fn lists_mesh_files_sorted() {
    let fx = fixture();
    let resp = call(&fx.state, "GET", "/api/meshes", None).await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(json_body(resp).await, json!(["broken.ply", "cube.obj", "tet.obj"]));
}

#[tokio::test]
async fn schema_lists_every_parameter() {
    let fx = fixture();
    let resp = call(&fx.state, "GET", "/api/params/schema", None).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let body = json_body(resp).await;
    let names: Vec<&str> = body["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    let defaults = serde_json::to_value(inkshade::pipeline::StyleParams::default()).unwrap();
    for key in defaults.as_object().unwrap().keys() {
        assert!(names.contains(&key.as_str()), "{key} missing from schema");
    }
}

#[tokio::test]
async fn single_output_returns_png_with_timing_header() {
    let fx = fixture();
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "cube.obj", "camera": small_camera() })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "image/png");
    let ms: f64 = resp.headers()["x-render-millis"].to_str().unwrap().parse().unwrap();
    assert!(ms >= 0.0);
    assert!(is_png(&bytes(resp).await));
}

#[tokio::test]
async fn several_outputs_return_base64_images() {
    let fx = fixture();
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({
            "mesh": "tet.obj",
            "camera": small_camera(),
            "params": { "w_geom": 0.4, "w_nd": 0.6 },
            "outputs": ["final", "lines", "shadow", "normal_depth"],
        })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers().contains_key("x-render-millis"));
    let body = json_body(resp).await;
    let images = body["images"].as_object().unwrap();
    assert_eq!(images.len(), 4);
    for (name, data) in images {
        let png = base64::engine::general_purpose::STANDARD
            .decode(data.as_str().unwrap())
            .unwrap();
        assert!(is_png(&png), "{name} is not a PNG");
    }
}

#[tokio::test]
async fn last_timings_is_404_until_a_render_completes() {
    let fx = fixture();
    let resp = call(&fx.state, "GET", "/api/last-timings", None).await;
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);

    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "cube.obj", "camera": small_camera() })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::OK);

    let resp = call(&fx.state, "GET", "/api/last-timings", None).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let body = json_body(resp).await;
    assert_eq!(body["mesh"], "cube.obj");
    assert!(body["timings"]["total_ms"].as_f64().unwrap() >= 0.0);
}

#[tokio::test]
async fn invalid_params_are_400_with_violations() {
    let fx = fixture();
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "cube.obj", "params": { "w_geom": 0.9, "line_b_max": 2.0 } })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let body = json_body(resp).await;
    let fields: Vec<&str> = body["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["field"].as_str().unwrap())
        .collect();
    assert!(fields.contains(&"w_geom+w_nd"), "{fields:?}");
    assert!(fields.contains(&"line_b_max"), "{fields:?}");
}

#[tokio::test]
async fn unknown_param_key_is_400() {
    let fx = fixture();
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "cube.obj", "params": { "glow": 1.0 } })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    assert!(json_body(resp).await["error"].is_string());
}

#[tokio::test]
async fn bad_camera_is_400_with_violation() {
    let fx = fixture();
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "cube.obj", "camera": { "orbit": { "elevation_deg": 95.0 } } })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    assert_eq!(json_body(resp).await["violations"][0]["field"], "camera");
}

#[tokio::test]
async fn malformed_body_is_400() {
    let fx = fixture();
    let req = Request::builder()
        .method("POST")
        .uri("/api/render")
        .body(Body::from("{ nope"))
        .unwrap();
    let resp = router(Arc::clone(&fx.state)).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_mesh_is_404() {
    let fx = fixture();
    for id in ["teapot.obj", "../cube.obj", "notes.txt"] {
        let resp = call(&fx.state, "POST", "/api/render", Some(json!({ "mesh": id }))).await;
        assert_eq!(resp.status(), StatusCode::NOT_FOUND, "{id}");
    }
}

#[tokio::test]
async fn unreadable_mesh_is_422() {
    let fx = fixture();
    let resp = call(&fx.state, "POST", "/api/render", Some(json!({ "mesh": "broken.ply" }))).await;
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn concurrent_render_of_same_mesh_is_409() {
    let fx = fixture();
    let guard = fx.state.try_begin("cube.obj").unwrap();
    let body = json!({ "mesh": "cube.obj", "camera": small_camera() });
    let resp = call(&fx.state, "POST", "/api/render", Some(body.clone())).await;
    assert_eq!(resp.status(), StatusCode::CONFLICT);

    // Other meshes are unaffected.
    let resp = call(
        &fx.state,
        "POST",
        "/api/render",
        Some(json!({ "mesh": "tet.obj", "camera": small_camera() })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::OK);

    drop(guard);
    let resp = call(&fx.state, "POST", "/api/render", Some(body)).await;
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn metrics_returns_a_report() {
    let fx = fixture();
    let resp = call(&fx.state, "POST", "/api/metrics", Some(json!({ "mesh": "cube.obj" }))).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let body = json_body(resp).await;
    assert!(body["line_band_mass"].as_f64().unwrap() >= 0.95);
    assert!(body["gates"].as_array().is_some_and(|g| !g.is_empty()));
    assert!(body["passed"].is_boolean());
}

#[tokio::test]
async fn metrics_on_pole_fixture_measures_shadow() {
    let fx = fixture();
    let resp = call(&fx.state, "POST", "/api/metrics", Some(json!({ "fixture": "pole" }))).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let ratio = json_body(resp).await["shadow_length_ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() <= 0.05, "ratio {ratio}");

    let resp = call(
        &fx.state,
        "POST",
        "/api/metrics",
        Some(json!({ "fixture": "pole", "mesh": "cube.obj" })),
    )
    .await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}
