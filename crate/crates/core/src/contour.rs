//! Object-space edge classification, index-buffer hidden-line removal and
//! stroke rasterization of the surviving segments.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::buffer::Image;
use crate::geometry::{
    face_orientation, is_front_facing, Camera, CameraFrame, EdgeAdjacency, EdgeFaces, EdgeId, Mesh,
    Vec3,
};
use crate::rasterizer::{project_segment, IdError, IndexBuffer, IntensityImage, LineStepper};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Silhouette,
    Border,
    Crease,
}

/// Set of [`EdgeKind`]s; an edge can be several at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EdgeKinds(u8);

impl EdgeKinds {
    fn bit(kind: EdgeKind) -> u8 {
        match kind {
            EdgeKind::Silhouette => 1,
            EdgeKind::Border => 2,
            EdgeKind::Crease => 4,
        }
    }

    pub fn with(self, kind: EdgeKind) -> Self {
        Self(self.0 | Self::bit(kind))
    }

    pub fn contains(self, kind: EdgeKind) -> bool {
        self.0 & Self::bit(kind) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeClass<T> {
    pub edge: EdgeId,
    pub kinds: EdgeKinds,
    pub endpoints: [Vec3<T>; 2],
}

/// A visible piece `[t0, t1]` of an edge, parametrized from its lower
/// vertex index to its higher one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibleSegment<T> {
    pub edge: EdgeId,
    pub t0: T,
    pub t1: T,
}

/// Per-face front-facing flags for one view.
pub fn facing_flags<T: Real>(mesh: &Mesh<T>, frame: &CameraFrame<T>) -> Vec<bool> {
    (0..mesh.face_count())
        .into_par_iter()
        .map(|f| is_front_facing(face_orientation(f, mesh, frame)))
        .collect()
}

pub fn classify_silhouette_edges<T: Real>(
    mesh: &Mesh<T>,
    adjacency: &EdgeAdjacency,
    camera: &Camera<T>,
) -> Vec<EdgeId> {
    silhouettes_from_facing(adjacency, &facing_flags(mesh, &camera.frame()))
}

pub fn silhouettes_from_facing(adjacency: &EdgeAdjacency, front: &[bool]) -> Vec<EdgeId> {
    filter_edges(adjacency, |faces| match faces {
        EdgeFaces::Interior(a, b) => front[a as usize] != front[b as usize],
        EdgeFaces::Border(_) => false,
    })
}

pub fn classify_border_edges(adjacency: &EdgeAdjacency) -> Vec<EdgeId> {
    filter_edges(adjacency, |faces| matches!(faces, EdgeFaces::Border(_)))
}

/// Interior edges whose adjacent face normals differ by more than
/// `threshold_deg`.
pub fn classify_crease_edges<T: Real>(
    mesh: &Mesh<T>,
    adjacency: &EdgeAdjacency,
    threshold_deg: T,
) -> Vec<EdgeId> {
    let threshold = threshold_deg.to_radians();
    filter_edges(adjacency, |faces| match faces {
        EdgeFaces::Interior(a, b) => {
            let c = mesh.face_normal(a as usize).dot(mesh.face_normal(b as usize));
            c.max(-T::one()).min(T::one()).acos() > threshold
        }
        EdgeFaces::Border(_) => false,
    })
}

fn filter_edges(adjacency: &EdgeAdjacency, keep: impl Fn(EdgeFaces) -> bool + Sync) -> Vec<EdgeId> {
    adjacency
        .edges()
        .par_iter()
        .enumerate()
        .filter(|(_, e)| keep(e.faces))
        .map(|(i, _)| EdgeId(i as u32))
        .collect()
}

/// Union of the three classifications, deduplicated and in edge order.
pub fn candidate_edges<T: Real>(
    mesh: &Mesh<T>,
    adjacency: &EdgeAdjacency,
    silhouette: &[EdgeId],
    border: &[EdgeId],
    crease: &[EdgeId],
) -> Vec<EdgeClass<T>> {
    let mut kinds = vec![EdgeKinds::default(); adjacency.len()];
    for (set, kind) in [
        (silhouette, EdgeKind::Silhouette),
        (border, EdgeKind::Border),
        (crease, EdgeKind::Crease),
    ] {
        for e in set {
            kinds[e.index()] = kinds[e.index()].with(kind);
        }
    }
    kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| !k.is_empty())
        .map(|(i, &k)| {
            let edge = EdgeId(i as u32);
            let [a, b] = adjacency.edge(edge).vertices;
            EdgeClass {
                edge,
                kinds: k,
                endpoints: [mesh.vertex(a as usize), mesh.vertex(b as usize)],
            }
        })
        .collect()
}

/// Sample each candidate against the index buffer and keep runs of samples
/// that see their own id.
///
/// An edge gets `max(samples_min, projected length in px)` samples at
/// `t = (i + 0.5) / n`; a run of samples `i0..=i1` becomes the segment
/// `[i0 / n, (i1 + 1) / n]`, clipped to the part in front of the near plane.
pub fn hidden_line_removal<T: Real>(
    candidates: &[EdgeId],
    index: &IndexBuffer,
    adjacency: &EdgeAdjacency,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    samples_min: usize,
) -> Result<Vec<VisibleSegment<T>>, IdError> {
    let ids: HashMap<EdgeId, u32> = index
        .edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as u32 + 1))
        .collect();
    let per_edge: Result<Vec<Vec<VisibleSegment<T>>>, IdError> = candidates
        .par_iter()
        .map(|&e| {
            let id = *ids.get(&e).ok_or(IdError::UnknownEdge(e.0))?;
            Ok(edge_segments(e, id, index, adjacency, mesh, frame, samples_min))
        })
        .collect();
    Ok(per_edge?.into_iter().flatten().collect())
}

fn edge_segments<T: Real>(
    e: EdgeId,
    id: u32,
    index: &IndexBuffer,
    adjacency: &EdgeAdjacency,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    samples_min: usize,
) -> Vec<VisibleSegment<T>> {
    let [a, b] = adjacency.edge(e).vertices.map(|v| mesh.vertex(v as usize));
    let Some(seg) = project_segment(frame, a, b) else {
        return Vec::new();
    };
    let stepper = LineStepper::new(&seg, frame.orthographic);
    let (w, h) = index.ids.dims();
    let len = (seg.b.x - seg.a.x).hypot(seg.b.y - seg.a.y).ceil().to_usize().unwrap_or(0);
    let n = samples_min.max(len).max(1);
    let nt = T::lit(n as f64);

    let seen = |i: usize| {
        let t = (T::lit(i as f64) + T::lit(0.5)) / nt;
        if t < seg.t0 || t > seg.t1 {
            return false;
        }
        let (x, y) = stepper.pixel_for(frame.project(a.lerp(b, t)));
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && index.ids.get(x as usize, y as usize) == id
    };

    let mut out = Vec::new();
    let mut start = None;
    for i in 0..=n {
        let on = i < n && seen(i);
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(i0)) => {
                let t0 = (T::lit(i0 as f64) / nt).max(seg.t0);
                let t1 = (T::lit(i as f64) / nt).min(seg.t1);
                if t0 < t1 {
                    out.push(VisibleSegment { edge: e, t0, t1 });
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Draw each segment as a 1-px stroke of the given darkness.
pub fn render_geometry_lines<T: Real>(
    segments: &[VisibleSegment<T>],
    adjacency: &EdgeAdjacency,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    darkness: T,
) -> IntensityImage<T> {
    let w = frame.width.to_usize().unwrap_or(0);
    let h = frame.height.to_usize().unwrap_or(0);
    let mut img = Image::new(w, h, T::zero());
    let darkness = darkness.clamp01();
    for s in segments {
        let [a, b] = adjacency.edge(s.edge).vertices.map(|v| mesh.vertex(v as usize));
        let Some(seg) = project_segment(frame, a.lerp(b, s.t0), a.lerp(b, s.t1)) else {
            continue;
        };
        LineStepper::new(&seg, frame.orthographic).for_each(w, h, |x, y, _| {
            if img.get(x, y) < darkness {
                img.set(x, y, darkness);
            }
        });
    }
    img
}

/// Classified edges as an SVG overlay in image coordinates.
pub fn edges_to_svg<T: Real>(classes: &[EdgeClass<T>], frame: &CameraFrame<T>) -> String {
    let (w, h) = (frame.width.as_f64(), frame.height.as_f64());
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    for c in classes {
        let Some(seg) = project_segment(frame, c.endpoints[0], c.endpoints[1]) else {
            continue;
        };
        let color = if c.kinds.contains(EdgeKind::Silhouette) {
            "#d62728"
        } else if c.kinds.contains(EdgeKind::Border) {
            "#1f77b4"
        } else {
            "#2ca02c"
        };
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1\" data-edge=\"{}\"/>",
            seg.a.x.as_f64(),
            seg.a.y.as_f64(),
            seg.b.x.as_f64(),
            seg.b.y.as_f64(),
            c.edge.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::Viewport;
    use crate::rasterizer::rasterize_ids;

    fn cube_setup() -> (Mesh<f64>, EdgeAdjacency, Camera<f64>) {
        let m = fixtures::cube::<f64>();
        let adj = EdgeAdjacency::build(&m).unwrap();
        let cam = fixtures::front_camera(5.0, 40.0, Viewport::square(128));
        (m, adj, cam)
    }

    fn is_axis_edge(m: &Mesh<f64>, adj: &EdgeAdjacency, e: EdgeId) -> bool {
        let [a, b] = adj.edge(e).vertices.map(|v| m.vertex(v as usize));
        let d = b - a;
        [d.x, d.y, d.z].iter().filter(|c| c.abs() > 1e-9).count() == 1
    }

    #[test]
    fn cube_front_view_silhouette_is_front_outline() {
        let (m, adj, cam) = cube_setup();
        let sil = classify_silhouette_edges(&m, &adj, &cam);
        assert_eq!(sil.len(), 4);
        for e in sil {
            let [a, b] = adj.edge(e).vertices.map(|v| m.vertex(v as usize));
            assert_eq!((a.z, b.z), (1.0, 1.0));
            assert!(is_axis_edge(&m, &adj, e));
        }
    }

    #[test]
    fn border_sets() {
        let (m, adj, _) = cube_setup();
        assert!(classify_border_edges(&adj).is_empty());
        let quad = fixtures::quad::<f64>();
        let qa = EdgeAdjacency::build(&quad).unwrap();
        assert_eq!(classify_border_edges(&qa).len(), 4);
        assert_eq!(classify_crease_edges(&m, &adj, 60.0).len(), 12);
        assert!(classify_crease_edges(&m, &adj, 91.0).is_empty());
        let grid = fixtures::grid::<f64>(6);
        let ga = EdgeAdjacency::build(&grid).unwrap();
        assert!(classify_crease_edges(&grid, &ga, 0.5).is_empty());
    }

    #[test]
    fn candidates_merge_kinds() {
        let (m, adj, cam) = cube_setup();
        let sil = classify_silhouette_edges(&m, &adj, &cam);
        let crease = classify_crease_edges(&m, &adj, 40.0);
        let cands = candidate_edges(&m, &adj, &sil, &[], &crease);
        assert_eq!(cands.len(), 12);
        let both = cands
            .iter()
            .filter(|c| c.kinds.contains(EdgeKind::Silhouette) && c.kinds.contains(EdgeKind::Crease))
            .count();
        assert_eq!(both, 4);
    }

    #[test]
    fn unoccluded_edge_is_one_full_segment() {
        let m = fixtures::quad::<f64>();
        let adj = EdgeAdjacency::build(&m).unwrap();
        let cam = fixtures::front_camera(4.0, 40.0, Viewport::square(64));
        let border = classify_border_edges(&adj);
        let idx = rasterize_ids(&border, &adj, &m, &cam, 1e-3).unwrap();
        let segs = hidden_line_removal(&border, &idx, &adj, &m, &cam.frame(), 8).unwrap();
        // Corner pixels are shared by two edges, so allow one lost sample
        // at each end.
        for e in &border {
            let total: f64 = segs.iter().filter(|s| s.edge == *e).map(|s| s.t1 - s.t0).sum();
            assert!(total > 0.85, "edge {e:?} visible {total}");
        }
    }

    #[test]
    fn unknown_candidate_is_an_error() {
        let m = fixtures::quad::<f64>();
        let adj = EdgeAdjacency::build(&m).unwrap();
        let cam = fixtures::front_camera(4.0, 40.0, Viewport::square(32));
        let idx = rasterize_ids(&[EdgeId(0)], &adj, &m, &cam, 1e-3).unwrap();
        let err = hidden_line_removal(&[EdgeId(1)], &idx, &adj, &m, &cam.frame(), 8).unwrap_err();
        assert_eq!(err, IdError::UnknownEdge(1));
    }

    #[test]
    fn empty_segments_give_blank_image() {
        let (m, adj, cam) = cube_setup();
        let img = render_geometry_lines::<f64>(&[], &adj, &m, &cam.frame(), 0.6);
        assert!(img.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn svg_lists_every_edge() {
        let (m, adj, cam) = cube_setup();
        let crease = classify_crease_edges(&m, &adj, 40.0);
        let cands = candidate_edges(&m, &adj, &[], &[], &crease);
        let svg = edges_to_svg(&cands, &cam.frame());
        assert_eq!(svg.matches("<line").count(), 12);
    }
}
