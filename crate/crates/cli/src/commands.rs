//! The `render` and `metrics` commands, returning exit codes instead of
//! terminating so they can be driven from tests.

use std::path::{Path, PathBuf};

use inkshade::geometry::DirectionalLight;
use inkshade::pipeline::{render_frame, ParamsError, StyleParams};
use inkshade::stylemetrics::{style_report, PoleScene};

use crate::scene::{load_source, pole_scene, CameraSpec, FixtureKind, Orbit, SceneError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Usage = 2,
    Load = 3,
    Render = 4,
    Gates = 5,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self {
            exit,
            message: message.into(),
        }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        let exit = match e {
            SceneError::Load(_) => Exit::Load,
            SceneError::Camera(_) => Exit::Usage,
        };
        Failure::new(exit, e.to_string())
    }
}

/// Violation list, one per line, for standard error.
pub fn describe_params_error(e: &ParamsError) -> String {
    let mut out = String::from("invalid parameters:");
    for v in e.violations() {
        out.push_str("\n  ");
        if v.field.is_empty() {
            out.push_str(&v.message);
        } else {
            out.push_str(&v.to_string());
        }
    }
    out
}

pub fn load_params(path: Option<&Path>) -> Result<StyleParams, Failure> {
    let Some(path) = path else {
        return Ok(StyleParams::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(Exit::Usage, format!("cannot read params {}: {e}", path.display())))?;
    StyleParams::from_json(&text).map_err(|e| Failure::new(Exit::Usage, describe_params_error(&e)))
}

fn camera_spec(arg: Option<&str>) -> Result<CameraSpec, Failure> {
    arg.map_or(Ok(CameraSpec::default()), |a| CameraSpec::parse_arg(a).map_err(Failure::from))
}

#[derive(Debug, Clone, Default)]
pub struct RenderArgs {
    pub mesh: String,
    pub out: PathBuf,
    pub params: Option<PathBuf>,
    pub camera: Option<String>,
    pub dump_intermediates: Option<PathBuf>,
}

pub fn render(args: &RenderArgs) -> Result<String, Failure> {
    let params = load_params(args.params.as_deref())?;
    let spec = camera_spec(args.camera.as_deref())?;
    let mesh = load_source(&args.mesh)?;
    let camera = spec.resolve(&mesh)?;
    let frame = render_frame(&mesh, &camera, &params).map_err(|e| Failure::new(Exit::Render, e.to_string()))?;
    let png = frame.final_png().map_err(|e| Failure::new(Exit::Render, e.to_string()))?;
    std::fs::write(&args.out, png)
        .map_err(|e| Failure::new(Exit::Render, format!("cannot write {}: {e}", args.out.display())))?;
    if let Some(dir) = &args.dump_intermediates {
        frame
            .write_intermediates(dir)
            .map_err(|e| Failure::new(Exit::Render, e.to_string()))?;
    }
    Ok(format!(
        "wrote {} ({}x{}, {} faces, {:.1} ms)",
        args.out.display(),
        frame.width(),
        frame.height(),
        frame.stats.faces,
        frame.timings.total_ms
    ))
}

#[derive(Debug, Clone, Default)]
pub struct MetricsArgs {
    pub mesh: Option<String>,
    pub params: Option<PathBuf>,
    pub camera: Option<String>,
    pub report: PathBuf,
    pub fixture: FixtureKind,
    pub histogram: Option<PathBuf>,
}

pub fn metrics(args: &MetricsArgs) -> Result<String, Failure> {
    let params = load_params(args.params.as_deref())?;
    let report = match args.fixture {
        FixtureKind::Pole => {
            if args.mesh.is_some() || args.camera.is_some() {
                return Err(Failure::new(
                    Exit::Usage,
                    "--fixture pole uses its own scene; drop --mesh and --camera",
                ));
            }
            let o = Orbit::default();
            let (fx, mesh, camera) = pole_scene(o.width, o.height);
            let light = DirectionalLight::from_angles(params.light_azimuth_deg, params.light_elevation_deg)
                .map_err(|e| Failure::new(Exit::Usage, e.to_string()))?;
            let frame = render_frame(&mesh, &camera, &params).map_err(|e| Failure::new(Exit::Render, e.to_string()))?;
            let scene = PoleScene {
                fixture: &fx,
                mesh: &mesh,
                camera: &camera,
                light: &light,
            };
            style_report(&frame, &params, Some(scene)).map_err(|e| Failure::new(Exit::Render, e.to_string()))?
        }
        FixtureKind::None => {
            let source = args
                .mesh
                .as_deref()
                .ok_or_else(|| Failure::new(Exit::Usage, "--mesh is required unless --fixture pole is given"))?;
            let spec = camera_spec(args.camera.as_deref())?;
            let mesh = load_source(source)?;
            let camera = spec.resolve(&mesh)?;
            let frame = render_frame(&mesh, &camera, &params).map_err(|e| Failure::new(Exit::Render, e.to_string()))?;
            style_report(&frame, &params, None).map_err(|e| Failure::new(Exit::Render, e.to_string()))?
        }
    };
    std::fs::write(&args.report, report.to_json())
        .map_err(|e| Failure::new(Exit::Render, format!("cannot write {}: {e}", args.report.display())))?;
    if let Some(path) = &args.histogram {
        std::fs::write(path, report.line_histogram.to_csv())
            .map_err(|e| Failure::new(Exit::Render, format!("cannot write {}: {e}", path.display())))?;
    }
    if report.passed {
        Ok(format!("all gates passed; report at {}", args.report.display()))
    } else {
        let failed: Vec<String> = report
            .gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| format!("{} = {:?} (target {})", g.name, g.value, g.target))
            .collect();
        Err(Failure::new(
            Exit::Gates,
            format!("gate failure: {}; report at {}", failed.join(", "), args.report.display()),
        ))
    }
}
