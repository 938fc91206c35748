//! Turning command-line and request inputs into a mesh, a camera and an
//! optional measurement fixture.

use std::path::Path;

use inkshade::fixtures::{self, PoleFixture};
use inkshade::geometry::{load_mesh, Camera, Mesh, Vec3, Viewport};
use serde::{Deserialize, Serialize};

/// Prefix that selects a procedural mesh instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub const BUILTINS: &[&str] = &["cube", "tetrahedron", "quad", "icosphere", "torus", "pole"];

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot load mesh: {0}")]
    Load(String),
    #[error("invalid camera: {0}")]
    Camera(String),
}

/// Load `builtin:NAME` or an `.obj`/`.ply` path.
pub fn load_source(source: &str) -> Result<Mesh<f64>, SceneError> {
    if let Some(name) = source.strip_prefix(BUILTIN_PREFIX) {
        return builtin(name).ok_or_else(|| {
            SceneError::Load(format!("unknown builtin '{name}', expected one of {}", BUILTINS.join(", ")))
        });
    }
    load_path(Path::new(source))
}

pub fn load_path(path: &Path) -> Result<Mesh<f64>, SceneError> {
    load_mesh::<f64>(path).map_err(|e| SceneError::Load(e.to_string()))
}

fn builtin(name: &str) -> Option<Mesh<f64>> {
    Some(match name {
        "cube" => fixtures::cube(),
        "tetrahedron" => fixtures::tetrahedron(),
        "quad" => fixtures::quad(),
        "icosphere" => fixtures::icosphere(4),
        "torus" => fixtures::bumpy_torus(250, 200, 0.04),
        "pole" => PoleFixture::default().mesh(),
        _ => return None,
    })
}

/// Orbit around the mesh's bounding sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Orbit {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub fov_y_deg: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Orbit {
    fn default() -> Self {
        Self {
            azimuth_deg: 35.0,
            elevation_deg: 25.0,
            fov_y_deg: 40.0,
            width: 512,
            height: 512,
        }
    }
}

/// Largest accepted viewport side.
pub const MAX_VIEWPORT: u32 = 4096;

/// Either an orbit description or a full camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CameraSpec {
    Orbit { orbit: Orbit },
    Explicit(Camera<f64>),
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec::Orbit { orbit: Orbit::default() }
    }
}

impl CameraSpec {
    /// Parse `orbit:AZ,EL[,FOV][@WxH]`, inline JSON, or a path to a JSON
    /// file.
    pub fn parse_arg(arg: &str) -> Result<Self, SceneError> {
        let bad = |m: String| SceneError::Camera(m);
        if let Some(rest) = arg.strip_prefix("orbit:") {
            let (angles, size) = match rest.split_once('@') {
                Some((a, s)) => (a, Some(s)),
                None => (rest, None),
            };
            let nums: Vec<f64> = angles
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| bad(format!("'{v}': {e}"))))
                .collect::<Result<_, _>>()?;
            let mut orbit = Orbit::default();
            match nums.as_slice() {
                [az, el] => (orbit.azimuth_deg, orbit.elevation_deg) = (*az, *el),
                [az, el, fov] => (orbit.azimuth_deg, orbit.elevation_deg, orbit.fov_y_deg) = (*az, *el, *fov),
                _ => return Err(bad(format!("expected orbit:AZ,EL[,FOV], got '{arg}'"))),
            }
            if let Some(size) = size {
                let (w, h) = size
                    .split_once('x')
                    .ok_or_else(|| bad(format!("expected WxH, got '{size}'")))?;
                orbit.width = w.parse().map_err(|e| bad(format!("width '{w}': {e}")))?;
                orbit.height = h.parse().map_err(|e| bad(format!("height '{h}': {e}")))?;
            }
            return Ok(CameraSpec::Orbit { orbit });
        }
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg).map_err(|e| bad(format!("cannot read {arg}: {e}")))?
        };
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    }

    /// Concrete camera for a mesh. The result is validated.
    pub fn resolve(&self, mesh: &Mesh<f64>) -> Result<Camera<f64>, SceneError> {
        let camera = match *self {
            CameraSpec::Explicit(c) => c,
            CameraSpec::Orbit { orbit } => {
                if !(-90.0..=90.0).contains(&orbit.elevation_deg) || !orbit.azimuth_deg.is_finite() {
                    return Err(SceneError::Camera(format!(
                        "orbit elevation {} outside [-90, 90] or azimuth {} not finite",
                        orbit.elevation_deg, orbit.azimuth_deg
                    )));
                }
                let (center, radius) = mesh
                    .bounding_sphere()
                    .unwrap_or((Vec3::new(0.0, 0.0, 0.0), 1.0));
                Camera::orbit(
                    center,
                    radius,
                    Viewport::new(orbit.width, orbit.height),
                    orbit.fov_y_deg,
                    orbit.azimuth_deg,
                    orbit.elevation_deg,
                )
            }
        };
        let vp = camera.viewport;
        if vp.width > MAX_VIEWPORT || vp.height > MAX_VIEWPORT {
            return Err(SceneError::Camera(format!(
                "viewport {}x{} exceeds {MAX_VIEWPORT}",
                vp.width, vp.height
            )));
        }
        camera.validate().map_err(|e| SceneError::Camera(e.to_string()))?;
        Ok(camera)
    }
}

/// Scene used for shadow-length measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    #[default]
    None,
    Pole,
}

/// The pole fixture with its top-down camera at the given size.
pub fn pole_scene(width: u32, height: u32) -> (PoleFixture, Mesh<f64>, Camera<f64>) {
    let fx = PoleFixture::default();
    let mesh = fx.mesh();
    let camera = fx.camera(Viewport::new(width, height));
    (fx, mesh, camera)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_shorthand() {
        let spec = CameraSpec::parse_arg("orbit:10,20,30@64x48").unwrap();
        let CameraSpec::Orbit { orbit } = spec else { panic!("{spec:?}") };
        assert_eq!((orbit.azimuth_deg, orbit.elevation_deg, orbit.fov_y_deg), (10.0, 20.0, 30.0));
        assert_eq!((orbit.width, orbit.height), (64, 48));
        assert!(CameraSpec::parse_arg("orbit:10").is_err());
        assert!(CameraSpec::parse_arg("orbit:a,b").is_err());
    }

    #[test]
    fn json_forms() {
        let orbit = CameraSpec::parse_arg(r#"{"orbit": {"azimuth_deg": 5}}"#).unwrap();
        assert!(matches!(orbit, CameraSpec::Orbit { orbit } if orbit.azimuth_deg == 5.0 && orbit.width == 512));
        let cam = fixtures::front_camera::<f64>(5.0, 40.0, Viewport::square(32));
        let text = serde_json::to_string(&cam).unwrap();
        assert_eq!(CameraSpec::parse_arg(&text).unwrap(), CameraSpec::Explicit(cam));
    }

    #[test]
    fn oversized_viewport_is_rejected() {
        let spec = CameraSpec::Orbit {
            orbit: Orbit { width: 10_000, ..Orbit::default() },
        };
        assert!(spec.resolve(&fixtures::cube()).is_err());
    }

    #[test]
    fn builtins_load() {
        for name in BUILTINS {
            assert!(load_source(&format!("builtin:{name}")).is_ok(), "{name}");
        }
        assert!(matches!(load_source("builtin:nope"), Err(SceneError::Load(_))));
        assert!(matches!(load_source("/no/such/file.obj"), Err(SceneError::Load(_))));
    }
}
