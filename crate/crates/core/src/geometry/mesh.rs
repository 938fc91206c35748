use super::{GeometryError, Vec3};
use crate::scalar::Real;

/// Indexed triangle mesh with per-face normals and centroids.
///
/// Face normals follow the stored counter-clockwise winding. Zero-area faces
/// are removed on construction so every stored normal is unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[u32; 3]>,
    face_normal: Vec<Vec3<T>>,
    face_centroid: Vec<Vec3<T>>,
    dropped_degenerate: usize,
}

impl<T: Real> Mesh<T> {
    /// Build a mesh, dropping degenerate faces. Fails on out-of-range indices
    /// or when nothing survives cleanup.
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let mesh = Self::with_faces(vertices, faces)?;
        if mesh.faces.is_empty() {
            return Err(GeometryError::NoFaces);
        }
        Ok(mesh)
    }

    /// A mesh with no faces at all. Useful as the "nothing to draw" input.
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            faces: Vec::new(),
            face_normal: Vec::new(),
            face_centroid: Vec::new(),
            dropped_degenerate: 0,
        }
    }

    fn with_faces(vertices: Vec<Vec3<T>>, faces: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        if let Some(v) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(v));
        }
        let mut kept = Vec::with_capacity(faces.len());
        let mut face_normal = Vec::with_capacity(faces.len());
        let mut face_centroid = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for (i, f) in faces.into_iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v as usize >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    face: i,
                    index: bad as usize,
                    vertex_count: vertices.len(),
                });
            }
            let [a, b, c] = f.map(|v| vertices[v as usize]);
            match triangle_normal(a, b, c) {
                Some(n) => {
                    kept.push(f);
                    face_normal.push(n);
                    face_centroid.push((a + b + c) / T::lit(3.0));
                }
                None => dropped += 1,
            }
        }
        Ok(Self {
            vertices,
            faces: kept,
            face_normal,
            face_centroid,
            dropped_degenerate: dropped,
        })
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    #[inline]
    pub fn face_normal(&self, face: usize) -> Vec3<T> {
        self.face_normal[face]
    }

    #[inline]
    pub fn face_centroid(&self, face: usize) -> Vec3<T> {
        self.face_centroid[face]
    }

    #[inline]
    pub fn face_normals(&self) -> &[Vec3<T>] {
        &self.face_normal
    }

    #[inline]
    pub fn face_positions(&self, face: usize) -> [Vec3<T>; 3] {
        self.faces[face].map(|v| self.vertices[v as usize])
    }

    #[inline]
    pub fn vertex(&self, index: usize) -> Vec3<T> {
        self.vertices[index]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Number of zero-area faces removed during construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    /// Axis-aligned bounds over referenced and unreferenced vertices alike.
    pub fn bounds(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), &v| {
            (lo.min_by_component(v), hi.max_by_component(v))
        }))
    }

    /// Sphere centred on the bounding box that contains every vertex.
    pub fn bounding_sphere(&self) -> Option<(Vec3<T>, T)> {
        let (lo, hi) = self.bounds()?;
        let center = (lo + hi) * T::lit(0.5);
        let radius = self
            .vertices
            .iter()
            .map(|&v| (v - center).norm())
            .fold(T::zero(), T::max);
        Some((center, radius))
    }

    /// Same geometry with every face winding reversed (normals negated).
    pub fn flipped(&self) -> Self {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::with_faces(self.vertices.clone(), faces).expect("flipping preserves validity")
    }

    pub fn translated(&self, offset: Vec3<T>) -> Self {
        let vertices = self.vertices.iter().map(|&v| v + offset).collect();
        Self::with_faces(vertices, self.faces.clone()).expect("translation preserves validity")
    }

    /// Uniform scale about the origin.
    pub fn scaled(&self, factor: T) -> Self {
        let vertices = self.vertices.iter().map(|&v| v * factor).collect();
        Self::with_faces(vertices, self.faces.clone()).expect("non-zero scale preserves validity")
    }

    /// Same faces in a different order: `order[i]` is the source index of the
    /// i-th output face.
    pub fn permuted_faces(&self, order: &[usize]) -> Self {
        let faces = order.iter().map(|&i| self.faces[i]).collect();
        Self::with_faces(self.vertices.clone(), faces).expect("permutation preserves validity")
    }

    /// Concatenate two meshes; face ids of `other` are shifted by
    /// `self.face_count()`.
    pub fn merged(&self, other: &Self) -> Self {
        let base = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|v| v + base)));
        Self::with_faces(vertices, faces).expect("merging valid meshes stays valid")
    }

    pub fn cast<U: Real>(&self) -> Mesh<U> {
        let vertices = self.vertices.iter().map(|v| v.cast()).collect();
        Mesh::with_faces(vertices, self.faces.clone()).expect("cast preserves indices")
    }
}

/// Unit normal of the CCW triangle `a, b, c`, or `None` when the area is
/// zero at the scalar's precision.
pub fn triangle_normal<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Option<Vec3<T>> {
    let e1 = b - a;
    let e2 = c - a;
    let n = e1.cross(e2);
    let scale = e1.norm_squared().max(e2.norm_squared());
    if !(n.norm() > T::epsilon() * T::lit(4.0) * scale) {
        return None;
    }
    n.normalized()
}
