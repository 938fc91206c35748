use super::{GeometryError, Mesh};
use crate::scalar::Real;

/// Index into [`EdgeAdjacency::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Faces incident to an undirected edge of a manifold mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFaces {
    /// Open boundary: a single incident face.
    Border(u32),
    /// Two incident faces, lower face id first.
    Interior(u32, u32),
}

impl EdgeFaces {
    pub fn contains(self, face: u32) -> bool {
        match self {
            EdgeFaces::Border(f) => f == face,
            EdgeFaces::Interior(a, b) => a == face || b == face,
        }
    }

    pub fn count(self) -> usize {
        match self {
            EdgeFaces::Border(_) => 1,
            EdgeFaces::Interior(..) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Vertex indices, smaller first.
    pub vertices: [u32; 2],
    pub faces: EdgeFaces,
}

/// Every undirected edge of a mesh, sorted by vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdjacency {
    edges: Vec<Edge>,
}

impl EdgeAdjacency {
    /// Enumerate edges and their incident faces. Edges with three or more
    /// incident faces make the mesh non-manifold and are rejected.
    pub fn build<T: Real>(mesh: &Mesh<T>) -> Result<Self, GeometryError> {
        let mut half: Vec<([u32; 2], u32)> = Vec::with_capacity(mesh.face_count() * 3);
        for (fi, &[a, b, c]) in mesh.faces().iter().enumerate() {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                half.push(([u.min(v), u.max(v)], fi as u32));
            }
        }
        half.sort_unstable();

        let mut edges = Vec::with_capacity(half.len() / 2 + 1);
        for group in half.chunk_by(|x, y| x.0 == y.0) {
            let key = group[0].0;
            let faces = match *group {
                [(_, f)] => EdgeFaces::Border(f),
                [(_, f0), (_, f1)] => EdgeFaces::Interior(f0, f1),
                _ => {
                    let [a, b] = key.map(|v| {
                        let p = mesh.vertices()[v as usize];
                        [p.x.as_f64(), p.y.as_f64(), p.z.as_f64()]
                    });
                    return Err(GeometryError::NonManifoldEdge {
                        a,
                        b,
                        faces: group.len(),
                    });
                }
            };
            edges.push(Edge {
                vertices: key,
                faces,
            });
        }
        if edges.len() > u32::MAX as usize {
            return Err(GeometryError::TooManyEdges(edges.len()));
        }
        Ok(Self { edges })
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.index()]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn border_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e.faces, EdgeFaces::Border(_)))
            .count()
    }
}
