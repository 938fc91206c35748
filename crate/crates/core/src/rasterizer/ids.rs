//! Index (item) buffer: candidate edges drawn as 1-px lines carrying their
//! id, depth-tested against the scene's triangles which act as id-0
//! occluders.

use rayon::prelude::*;

use super::line::{project_segment, LineStepper};
use super::triangle::{rasterize_visibility, VisibilityBuffer, NO_FACE};
use crate::buffer::Image;
use crate::geometry::{Camera, CameraFrame, EdgeAdjacency, EdgeId, Mesh};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IdError {
    #[error("{0} candidate edges exceed the 32-bit id space")]
    Overflow(usize),
    #[error("edge {0} is not in the index buffer's id space")]
    UnknownEdge(u32),
}

/// Per-pixel edge id; `0` is background or occluder, id `k ≥ 1` is
/// `edges[k - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexBuffer {
    pub ids: Image<u32>,
    pub edges: Vec<EdgeId>,
}

impl IndexBuffer {
    pub fn edge_for(&self, id: u32) -> Option<EdgeId> {
        id.checked_sub(1).and_then(|i| self.edges.get(i as usize)).copied()
    }

    /// Count of pixels carrying `id`.
    pub fn coverage(&self, id: u32) -> usize {
        self.ids.pixels().iter().filter(|&&v| v == id).count()
    }
}

pub fn rasterize_ids<T: Real>(
    candidates: &[EdgeId],
    adjacency: &EdgeAdjacency,
    mesh: &Mesh<T>,
    camera: &Camera<T>,
    depth_offset: T,
) -> Result<IndexBuffer, IdError> {
    let frame = camera.frame();
    let vis = rasterize_visibility(mesh, &frame);
    rasterize_ids_with(&vis, candidates, adjacency, mesh, &frame, depth_offset)
}

/// Draw `candidates` over an existing visibility buffer.
///
/// An edge pixel survives when no triangle covers it, when the covering
/// triangle is one of the edge's own faces, or when the edge is nearer than
/// the covering surface moved `depth_offset` toward the viewer. Between
/// edges the nearest wins, ties going to the lower id.
pub fn rasterize_ids_with<T: Real>(
    vis: &VisibilityBuffer<T>,
    candidates: &[EdgeId],
    adjacency: &EdgeAdjacency,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    depth_offset: T,
) -> Result<IndexBuffer, IdError> {
    if candidates.len() >= u32::MAX as usize {
        return Err(IdError::Overflow(candidates.len()));
    }
    let (w, h) = vis.face.dims();
    let range = frame.far - frame.near;

    let fragments: Vec<Vec<(usize, T)>> = candidates
        .par_iter()
        .map(|&e| {
            let edge = adjacency.edge(e);
            let [a, b] = edge.vertices.map(|v| mesh.vertex(v as usize));
            let mut out = Vec::new();
            let Some(seg) = project_segment(frame, a, b) else {
                return out;
            };
            LineStepper::new(&seg, frame.orthographic).for_each(w, h, |x, y, z| {
                let d = (z - frame.near) / range;
                let face = vis.face.get(x, y);
                let visible = face == NO_FACE
                    || edge.faces.contains(face)
                    || d - depth_offset < vis.depth.get(x, y);
                if visible {
                    out.push((y * w + x, d));
                }
            });
            out
        })
        .collect();

    let mut ids = Image::new(w, h, 0u32);
    let mut best = Image::new(w, h, T::infinity());
    for (i, frags) in fragments.iter().enumerate() {
        let id = i as u32 + 1;
        for &(at, d) in frags {
            if d < best.pixels()[at] {
                best.pixels_mut()[at] = d;
                ids.pixels_mut()[at] = id;
            }
        }
    }
    Ok(IndexBuffer {
        ids,
        edges: candidates.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::{Projection, Vec3, Viewport};

    fn ortho_cam() -> Camera<f64> {
        Camera {
            position: Vec3::new(0.0, 0.0, 5.0),
            look_at: Vec3::zero(),
            up: Vec3::new(0.0, 1.0, 0.0),
            projection: Projection::Orthographic { half_height: 2.0 },
            viewport: Viewport::square(64),
            near: 1.0,
            far: 9.0,
        }
    }

    fn lone_edge(z: f64) -> Mesh<f64> {
        // A tall thin triangle; its bottom edge is the one under test.
        Mesh::new(
            vec![
                Vec3::new(-1.5, -1.0, z),
                Vec3::new(1.5, -1.0, z),
                Vec3::new(0.0, -1.9, z),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn edge_between(adj: &EdgeAdjacency, a: u32, b: u32) -> EdgeId {
        adj.ids()
            .find(|&e| adj.edge(e).vertices == [a.min(b), a.max(b)])
            .unwrap()
    }

    #[test]
    fn unoccluded_edge_covers_its_pixels() {
        let m = lone_edge(0.0);
        let adj = EdgeAdjacency::build(&m).unwrap();
        let e = edge_between(&adj, 0, 1);
        let buf = rasterize_ids(&[e], &adj, &m, &ortho_cam(), 1e-3).unwrap();
        // x from 8 to 56 px, both ends inclusive.
        assert_eq!(buf.coverage(1), 49);
        assert_eq!(buf.edge_for(1), Some(e));
        assert_eq!(buf.edge_for(0), None);
    }

    #[test]
    fn edge_behind_quad_is_hidden() {
        let m = lone_edge(-1.0).merged(&fixtures::quad().translated(Vec3::new(0.0, 0.0, 0.5)).scaled(3.0));
        let adj = EdgeAdjacency::build(&m).unwrap();
        let e = edge_between(&adj, 0, 1);
        let buf = rasterize_ids(&[e], &adj, &m, &ortho_cam(), 1e-3).unwrap();
        assert_eq!(buf.coverage(1), 0);
    }
}
