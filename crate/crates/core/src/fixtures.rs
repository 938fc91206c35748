//! Procedural test scenes.

use std::collections::HashMap;

use crate::geometry::{Camera, Mesh, Projection, Vec3, Viewport};
use crate::scalar::Real;

fn v<T: Real>(x: f64, y: f64, z: f64) -> Vec3<T> {
    Vec3::from_f64(x, y, z)
}

/// Axis-aligned cube `[-1, 1]^3`, 8 vertices, 12 outward CCW triangles.
pub fn cube<T: Real>() -> Mesh<T> {
    let vertices = (0..8)
        .map(|i| {
            let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
            v(s(1), s(2), s(4))
        })
        .collect();
    let faces = vec![
        [4, 5, 7],
        [4, 7, 6],
        [0, 2, 3],
        [0, 3, 1],
        [1, 3, 7],
        [1, 7, 5],
        [0, 4, 6],
        [0, 6, 2],
        [2, 6, 7],
        [2, 7, 3],
        [0, 1, 5],
        [0, 5, 4],
    ];
    Mesh::new(vertices, faces).expect("cube is valid")
}

/// Cube scaled to half-extents and moved to `center`.
pub fn cuboid<T: Real>(center: Vec3<T>, half: Vec3<T>) -> Mesh<T> {
    let unit = cube::<T>();
    let vertices = unit
        .vertices()
        .iter()
        .map(|p| center + Vec3::new(p.x * half.x, p.y * half.y, p.z * half.z))
        .collect();
    Mesh::new(vertices, unit.faces().to_vec()).expect("cuboid is valid")
}

/// Regular tetrahedron inscribed in the cube `[-1, 1]^3`.
pub fn tetrahedron<T: Real>() -> Mesh<T> {
    let vertices = vec![
        v(1.0, 1.0, 1.0),
        v(1.0, -1.0, -1.0),
        v(-1.0, 1.0, -1.0),
        v(-1.0, -1.0, 1.0),
    ];
    let faces = orient_outward(&vertices, vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]);
    Mesh::new(vertices, faces).expect("tetrahedron is valid")
}

/// Unit square in the z = 0 plane split along its diagonal, facing +z.
pub fn quad<T: Real>() -> Mesh<T> {
    Mesh::new(
        vec![
            v(-1.0, -1.0, 0.0),
            v(1.0, -1.0, 0.0),
            v(1.0, 1.0, 0.0),
            v(-1.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("quad is valid")
}

/// Flat `n × n` grid of quads in the z = 0 plane spanning `[-1, 1]^2`.
pub fn grid<T: Real>(n: usize) -> Mesh<T> {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(v(
                -1.0 + 2.0 * i as f64 / n as f64,
                -1.0 + 2.0 * j as f64 / n as f64,
                0.0,
            ));
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    let at = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    for j in 0..n {
        for i in 0..n {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).expect("grid is valid")
}

/// Unit icosphere after `subdivisions` rounds of midpoint splitting
/// (20 · 4^s faces).
pub fn icosphere<T: Real>(subdivisions: u32) -> Mesh<T> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let unit = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    };
    verts.iter_mut().for_each(|p| *p = unit(*p));
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (pa, pb) = (verts[a as usize], verts[b as usize]);
                verts.push(unit([
                    (pa[0] + pb[0]) / 2.0,
                    (pa[1] + pb[1]) / 2.0,
                    (pa[2] + pb[2]) / 2.0,
                ]));
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices: Vec<Vec3<T>> = verts.iter().map(|p| v(p[0], p[1], p[2])).collect();
    let faces = orient_outward(&vertices, faces);
    Mesh::new(vertices, faces).expect("icosphere is valid")
}

/// Closed torus around the y axis with a sinusoidal surface relief; a
/// stand-in for dense scanned sculpture. Produces `2 · major · minor`
/// triangles.
pub fn bumpy_torus<T: Real>(major: usize, minor: usize, relief: f64) -> Mesh<T> {
    let (big_r, small_r) = (1.0, 0.4);
    let mut vertices = Vec::with_capacity(major * minor);
    let mut centers = Vec::with_capacity(major);
    for i in 0..major {
        let u = std::f64::consts::TAU * i as f64 / major as f64;
        centers.push([big_r * u.cos(), 0.0, big_r * u.sin()]);
        for j in 0..minor {
            let w = std::f64::consts::TAU * j as f64 / minor as f64;
            let r = small_r * (1.0 + relief * (7.0 * u).sin() * (5.0 * w).sin());
            let ring = big_r + r * w.cos();
            vertices.push(v(ring * u.cos(), r * w.sin(), ring * u.sin()));
        }
    }
    let at = |i: usize, j: usize| ((i % major) * minor + (j % minor)) as u32;
    let mut faces = Vec::with_capacity(2 * major * minor);
    for (i, cc) in centers.iter().enumerate() {
        for j in 0..minor {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            for f in [[a, b, c], [a, c, d]] {
                let p = f.map(|k| vertices[k as usize]);
                let n = (p[1] - p[0]).cross(p[2] - p[0]);
                let centroid = (p[0] + p[1] + p[2]) / T::lit(3.0);
                let out = centroid - v(cc[0], cc[1], cc[2]);
                faces.push(if n.dot(out) >= T::zero() { f } else { [f[0], f[2], f[1]] });
            }
        }
    }
    Mesh::new(vertices, faces).expect("torus is valid")
}

/// Horizontal square at `y = 0` with upward normal.
pub fn ground_plane<T: Real>(half_size: f64) -> Mesh<T> {
    let s = half_size;
    Mesh::new(
        vec![v(-s, 0.0, -s), v(s, 0.0, -s), v(s, 0.0, s), v(-s, 0.0, s)],
        vec![[0, 3, 2], [0, 2, 1]],
    )
    .expect("plane is valid")
}

/// Flip faces whose normal points toward the vertex centroid. Valid for
/// shapes that are star-shaped around their centroid.
fn orient_outward<T: Real>(vertices: &[Vec3<T>], faces: Vec<[u32; 3]>) -> Vec<[u32; 3]> {
    let center = vertices.iter().fold(Vec3::zero(), |a, &p| a + p) / T::lit(vertices.len() as f64);
    faces
        .into_iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let n = (b - a).cross(c - a);
            if n.dot((a + b + c) / T::lit(3.0) - center) < T::zero() {
                [f[0], f[2], f[1]]
            } else {
                f
            }
        })
        .collect()
}

/// Vertical square pole standing on a ground plane. The plane occupies
/// faces `0..2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleFixture {
    /// Base centre on the ground (x, z).
    pub base: [f64; 2],
    pub height: f64,
    pub half_width: f64,
    pub plane_half_size: f64,
}

impl Default for PoleFixture {
    fn default() -> Self {
        Self {
            base: [0.0, 0.0],
            height: 1.0,
            half_width: 0.04,
            plane_half_size: 2.6,
        }
    }
}

impl PoleFixture {
    pub const PLANE_FACES: std::ops::Range<usize> = 0..2;

    pub fn mesh<T: Real>(&self) -> Mesh<T> {
        let plane = ground_plane::<T>(self.plane_half_size);
        let h = self.height / 2.0;
        let pole = cuboid(
            v(self.base[0], h, self.base[1]),
            v(self.half_width, h, self.half_width),
        );
        plane.merged(&pole)
    }

    /// Orthographic top-down view of the whole plane; image x is world x and
    /// image up is world −z.
    pub fn camera<T: Real>(&self, viewport: Viewport) -> Camera<T> {
        let s = self.plane_half_size;
        let lift = 4.0 * (s + self.height);
        Camera {
            position: v(0.0, lift, 0.0),
            look_at: v(0.0, 0.0, 0.0),
            up: v(0.0, 0.0, -1.0),
            projection: Projection::Orthographic {
                half_height: T::lit(s * viewport.height.max(viewport.width) as f64
                    / viewport.width as f64),
            },
            viewport,
            near: T::lit(lift - self.height - 1.0),
            far: T::lit(lift + 1.0),
        }
    }

    /// Horizontal extent the top of the pole adds beyond its axis along a
    /// unit ground heading `(hx, hz)`.
    pub fn footprint_support(&self, heading: [f64; 2]) -> f64 {
        self.half_width * (heading[0].abs() + heading[1].abs())
    }
}

/// An open rectangle (border edges only) behind a thin vertical strip.
/// Returns `(mesh, strip face range)`.
pub fn edge_behind_strip<T: Real>(strip_half_width: f64) -> (Mesh<T>, std::ops::Range<usize>) {
    let back = Mesh::new(
        vec![
            v(-1.0, -0.5, 0.0),
            v(1.0, -0.5, 0.0),
            v(1.0, 0.5, 0.0),
            v(-1.0, 0.5, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("back quad");
    let w = strip_half_width;
    let strip = Mesh::new(
        vec![v(-w, -1.0, 0.6), v(w, -1.0, 0.6), v(w, 1.0, 0.6), v(-w, 1.0, 0.6)],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("strip quad");
    let n = back.face_count();
    let merged = back.merged(&strip);
    let total = merged.face_count();
    (merged, n..total)
}

/// Camera on +z looking at the origin, with a fixed depth range.
pub fn front_camera<T: Real>(distance: f64, fov_y_deg: f64, viewport: Viewport) -> Camera<T> {
    Camera {
        position: v(0.0, 0.0, distance),
        look_at: v(0.0, 0.0, 0.0),
        up: v(0.0, 1.0, 0.0),
        projection: Projection::Perspective {
            fov_y_deg: T::lit(fov_y_deg),
        },
        viewport,
        near: T::lit(distance * 0.25),
        far: T::lit(distance * 2.0),
    }
}

/// Serialize a mesh as OBJ text (used to round-trip fixtures through the
/// loader).
pub fn to_obj<T: Real>(mesh: &Mesh<T>) -> String {
    let mut out = String::new();
    for p in mesh.vertices() {
        out.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
    }
    for f in mesh.faces() {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}
