//! Meshes, adjacency, cameras and lights.

mod adjacency;
mod camera;
pub mod io;
mod light;
mod mesh;
mod vec3;

pub use adjacency::{Edge, EdgeAdjacency, EdgeFaces, EdgeId};
pub use camera::{Camera, CameraFrame, Projection, ScreenPoint, Viewport};
pub use io::load_mesh;
pub use light::DirectionalLight;
pub use mesh::{triangle_normal, Mesh};
pub use vec3::Vec3;

use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("mesh has no non-degenerate faces")]
    NoFaces,
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("face {face} references vertex {index} but only {vertex_count} exist")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("non-manifold edge {a:?} - {b:?} has {faces} adjacent faces")]
    NonManifoldEdge { a: [f64; 3], b: [f64; 3], faces: usize },
    #[error("{0} edges exceed the 32-bit id space")]
    TooManyEdges(usize),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid light: {0}")]
    InvalidLight(String),
}

/// Signed facing value `n · (p − eye)` of a face seen by `frame`.
///
/// With outward normals and CCW winding a face is front-facing when the
/// value is negative. Zero (face seen edge-on) counts as back-facing.
#[inline]
pub fn face_orientation<T: Real>(face: usize, mesh: &Mesh<T>, frame: &CameraFrame<T>) -> T {
    let centroid = mesh.face_centroid(face);
    mesh.face_normal(face).dot(frame.eye_to(centroid))
}

#[inline]
pub fn is_front_facing<T: Real>(orientation: T) -> bool {
    orientation < T::zero()
}
