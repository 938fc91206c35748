//! Orthographic shadow map, biased depth-test failure map, percentage-closer
//! filtering and the blend toward ambient.

use crate::buffer::{BufferError, Image};
use crate::geometry::{Camera, CameraFrame, DirectionalLight, Mesh, Projection, Vec3, Viewport};
use crate::rasterizer::{rasterize_visibility, IntensityImage};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ShadowError {
    #[error("cannot build a shadow map for an empty mesh")]
    EmptyMesh,
}

/// Nearest normalized depth toward the light, at twice the viewport size.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowMap<T> {
    pub depth: Image<T>,
    pub frame: CameraFrame<T>,
}

/// Per-pixel binary depth-test result (`1` = in shadow).
#[derive(Debug, Clone, PartialEq)]
pub struct FailureMap {
    pub fails: Image<u8>,
    /// Surface pixels whose light-space position fell outside the map; they
    /// are treated as lit.
    pub out_of_map: usize,
}

impl FailureMap {
    pub fn failed_count(&self) -> usize {
        self.fails.pixels().iter().filter(|&&v| v != 0).count()
    }
}

/// Orthographic light camera that encloses the mesh's bounding sphere.
pub fn light_camera<T: Real>(
    mesh: &Mesh<T>,
    light: &DirectionalLight<T>,
    viewport: Viewport,
) -> Result<Camera<T>, ShadowError> {
    let (center, radius) = mesh.bounding_sphere().ok_or(ShadowError::EmptyMesh)?;
    if mesh.is_empty() {
        return Err(ShadowError::EmptyMesh);
    }
    let radius = radius.max(T::lit(1e-6));
    let size = viewport.scaled(2);
    let dir = light.direction();
    let up = if dir.y.abs() > T::lit(0.99) {
        Vec3::new(T::zero(), T::zero(), -T::one())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let aspect = T::lit(size.width as f64 / size.height as f64);
    let pad = radius * T::lit(0.01);
    let distance = radius * T::lit(2.0);
    Ok(Camera {
        position: center + dir * distance,
        look_at: center,
        up,
        projection: Projection::Orthographic {
            half_height: (radius + pad) * T::one().max(T::one() / aspect),
        },
        viewport: size,
        near: distance - radius - pad,
        far: distance + radius + pad,
    })
}

pub fn build_shadow_map<T: Real>(
    mesh: &Mesh<T>,
    light: &DirectionalLight<T>,
    viewport: Viewport,
) -> Result<ShadowMap<T>, ShadowError> {
    let frame = light_camera(mesh, light, viewport)?.frame();
    let vis = rasterize_visibility(mesh, &frame);
    Ok(ShadowMap { depth: vis.depth, frame })
}

impl<T: Real> ShadowMap<T> {
    /// Texel and light-frame normalized depth of a world point, or `None`
    /// outside the map.
    pub fn lookup(&self, p: Vec3<T>) -> Option<((usize, usize), T)> {
        let s = self.frame.project(p);
        let (x, y) = (s.x.floor(), s.y.floor());
        if x < T::zero() || y < T::zero() {
            return None;
        }
        let (x, y) = (x.to_usize()?, y.to_usize()?);
        if x >= self.depth.width() || y >= self.depth.height() {
            return None;
        }
        Some(((x, y), self.frame.normalized_depth(s.z)))
    }
}

/// A pixel fails when `stored + bias < its own light-frame depth`.
/// `positions` holds the visible world point per camera pixel.
pub fn compute_failure_map<T: Real>(
    positions: &Image<Option<Vec3<T>>>,
    sm: &ShadowMap<T>,
    bias: T,
) -> FailureMap {
    let tested = positions.map(|p| match p {
        None => (0u8, false),
        Some(p) => match sm.lookup(p) {
            None => (0, true),
            Some(((x, y), d)) => (u8::from(sm.depth.get(x, y) + bias < d), false),
        },
    });
    FailureMap {
        out_of_map: tested.pixels().iter().filter(|t| t.1).count(),
        fails: tested.map(|t| t.0),
    }
}

/// Fraction of failed pixels in the `(2r+1)²` window around each pixel,
/// sampling with edge clamping. `r = 0` returns the binary map as-is.
pub fn pcf_filter<T: Real>(fails: &Image<u8>, radius: usize) -> Image<T> {
    let r = radius as isize;
    let rows: Image<u32> = Image::from_fn(fails.width(), fails.height(), |x, y| {
        (-r..=r).map(|k| u32::from(fails.get_clamped(x as isize + k, y as isize))).sum()
    });
    let n = ((2 * radius + 1) * (2 * radius + 1)) as f64;
    Image::from_fn(fails.width(), fails.height(), |x, y| {
        let count: u32 = (-r..=r).map(|k| rows.get_clamped(x as isize, y as isize + k)).sum();
        T::lit(count as f64 / n)
    })
}

/// `(1 − s)·shaded + s·ambient`.
pub fn apply_shadows<T: Real>(
    shaded: &IntensityImage<T>,
    fractions: &Image<T>,
    ambient: T,
) -> Result<IntensityImage<T>, BufferError> {
    shaded.zip_map(fractions, |v, s| (T::one() - s) * v + s * ambient)
}
