//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use inkshade::geometry::{Camera, CameraFrame, Mesh, Projection, Vec3, Viewport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The 3/4 view used for calibration renders.
pub fn reference_view(mesh: &Mesh<f64>, size: u32) -> Camera<f64> {
    let (c, r) = mesh.bounding_sphere().expect("non-empty mesh");
    Camera::orbit(c, r, Viewport::square(size), 40.0, 35.0, 25.0)
}

/// A perspective or orthographic camera on a random point of a sphere
/// around the mesh, looking at its centre.
pub fn random_camera(mesh: &Mesh<f64>, rng: &mut ChaCha8Rng, size: u32) -> Camera<f64> {
    let (c, r) = mesh.bounding_sphere().expect("non-empty mesh");
    let dir = loop {
        let v: Vec3<f64> = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.2 && n < 1.0 && (v.y / n).abs() < 0.95 {
            break v * (1.0 / n);
        }
    };
    let distance = r * rng.random_range(2.5..5.0);
    let projection = if rng.random_bool(0.25) {
        Projection::Orthographic { half_height: r * 1.2 }
    } else {
        Projection::Perspective { fov_y_deg: 45.0 }
    };
    Camera {
        position: c + dir * distance,
        look_at: c,
        up: Vec3::new(0.0, 1.0, 0.0),
        projection,
        viewport: Viewport::square(size),
        near: distance - 1.5 * r,
        far: distance + 1.5 * r,
    }
}

/// Möller–Trumbore ray/triangle intersection, returning the ray parameter.
pub fn ray_triangle(origin: Vec3<f64>, dir: Vec3<f64>, tri: [Vec3<f64>; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > 0.0).then_some(t)
}

/// Nearest face hit by a ray and the hit's view-axis distance, restricted
/// to the near/far range.
pub fn cast(mesh: &Mesh<f64>, frame: &CameraFrame<f64>, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for f in 0..mesh.face_count() {
        if let Some(t) = ray_triangle(origin, dir, mesh.face_positions(f)) {
            let z = (origin + dir * t - frame.position).dot(frame.forward);
            if z < frame.near || z > frame.far {
                continue;
            }
            if best.is_none_or(|(_, bz)| z < bz) {
                best = Some((f, z));
            }
        }
    }
    best
}

/// Ray through the centre of pixel `(x, y)`.
pub fn pixel_centre_ray(frame: &CameraFrame<f64>, x: usize, y: usize) -> (Vec3<f64>, Vec3<f64>) {
    let px = x as f64 + 0.5;
    let py = y as f64 + 0.5;
    let nx = px / frame.width * 2.0 - 1.0;
    let ny = 1.0 - py / frame.height * 2.0;
    let sx = nx * frame.half_extent * frame.aspect;
    let sy = ny * frame.half_extent;
    if frame.orthographic {
        (frame.position + frame.right * sx + frame.up * sy, frame.forward)
    } else {
        let d = frame.forward + frame.right * sx + frame.up * sy;
        (frame.position, d * (1.0 / d.norm()))
    }
}

/// Whether `p` is hidden from the camera by some face other than those in
/// `own`, with a relative tolerance on the distance along the ray.
pub fn occluded(mesh: &Mesh<f64>, frame: &CameraFrame<f64>, p: Vec3<f64>, own: &[usize]) -> bool {
    let (origin, dir) = if frame.orthographic {
        let back = (p - frame.position).dot(frame.forward);
        (p - frame.forward * back, frame.forward)
    } else {
        let d = p - frame.position;
        (frame.position, d * (1.0 / d.norm()))
    };
    let target = (p - origin).norm();
    (0..mesh.face_count()).filter(|f| !own.contains(f)).any(|f| {
        ray_triangle(origin, dir, mesh.face_positions(f)).is_some_and(|t| t < target * (1.0 - 1e-6))
    })
}

/// Undirected edges keyed by sorted vertex pair, with their incident faces,
/// built independently of the library.
pub fn edge_faces(mesh: &Mesh<f64>) -> BTreeMap<[u32; 2], Vec<usize>> {
    let mut map: BTreeMap<[u32; 2], Vec<usize>> = BTreeMap::new();
    for (f, tri) in mesh.faces().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            map.entry([a.min(b), a.max(b)]).or_default().push(f);
        }
    }
    map
}

/// Unit normal from the winding, computed directly from positions.
pub fn normal_of(mesh: &Mesh<f64>, f: usize) -> Vec3<f64> {
    let [a, b, c] = mesh.face_positions(f);
    let n = (b - a).cross(c - a);
    n * (1.0 / n.norm())
}

/// Per-sample agreement between emitted visible segments and the ray-cast
/// oracle.
#[derive(Debug, Default, Clone, Copy)]
pub struct HlrCheck {
    pub samples: usize,
    pub agree: usize,
    /// Runs with an occluded sample that is not the first or last one, or
    /// with more than one occluded sample.
    pub bad_runs: usize,
    pub runs: usize,
}

impl HlrCheck {
    pub fn agreement(&self) -> f64 {
        self.agree as f64 / self.samples.max(1) as f64
    }
}

/// Run edge classification, the id pass and hidden-line removal, then
/// re-sample each emitted run at the same parameters the removal used and
/// ask the ray caster whether each point is visible.
pub fn check_hlr(mesh: &Mesh<f64>, camera: &Camera<f64>, crease_deg: f64) -> HlrCheck {
    use inkshade::contour::*;
    use inkshade::geometry::EdgeAdjacency;
    use inkshade::rasterizer::{project_segment, rasterize_ids};

    let adj = EdgeAdjacency::build(mesh).unwrap();
    let frame = camera.frame();
    let sil = classify_silhouette_edges(mesh, &adj, camera);
    let border = classify_border_edges(&adj);
    let crease = classify_crease_edges(mesh, &adj, crease_deg);
    let cands: Vec<_> = candidate_edges(mesh, &adj, &sil, &border, &crease)
        .into_iter()
        .map(|c| c.edge)
        .collect();
    let index = rasterize_ids(&cands, &adj, mesh, camera, 1e-3).unwrap();
    let segments = hidden_line_removal(&cands, &index, &adj, mesh, &frame, 8).unwrap();

    let mut out = HlrCheck::default();
    for s in &segments {
        let edge = adj.edge(s.edge);
        let [a, b] = edge.vertices.map(|v| mesh.vertex(v as usize));
        let own: Vec<usize> = (0..mesh.face_count())
            .filter(|&f| edge.faces.contains(f as u32))
            .collect();
        let seg = project_segment(&frame, a, b).unwrap();
        let len = ((seg.b.x - seg.a.x).hypot(seg.b.y - seg.a.y)).ceil() as usize;
        let n = len.max(8);
        let idx: Vec<usize> = (0..n)
            .filter(|&i| {
                let t = (i as f64 + 0.5) / n as f64;
                t >= s.t0 && t <= s.t1
            })
            .collect();
        out.runs += 1;
        let hidden: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| occluded(mesh, &frame, a.lerp(b, (i as f64 + 0.5) / n as f64), &own))
            .collect();
        out.samples += idx.len();
        out.agree += idx.len() - hidden.len();
        let at_ends = hidden
            .iter()
            .all(|i| Some(i) == idx.first() || Some(i) == idx.last());
        if hidden.len() > 1 || !at_ends {
            out.bad_runs += 1;
        }
    }
    out
}
