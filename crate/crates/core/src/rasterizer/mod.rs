//! Software rasterization of depth, normal-depth, edge-id and shaded buffers.

mod ids;
pub mod line;
mod triangle;

pub use ids::{rasterize_ids, rasterize_ids_with, IdError, IndexBuffer};
pub use line::{project_segment, LineStepper, ScreenSegment};
pub use triangle::{rasterize_visibility, VisibilityBuffer, NO_FACE, SUBPIXEL_BITS};

use rayon::prelude::*;

use crate::buffer::Image;
use crate::geometry::{Camera, CameraFrame, Mesh, Vec3};
use crate::scalar::Real;

/// Normalized depth per pixel; uncovered pixels hold `1.0`.
pub type DepthBuffer<T> = Image<T>;
/// Brightness per pixel, 0 = black, 1 = white.
pub type IntensityImage<T> = Image<T>;
/// RGB = camera-space normal as `(n + 1) / 2 · 255`, A = depth · 255.
pub type NormalDepthMap = Image<[u8; 4]>;

pub const BACKGROUND_NORMAL_DEPTH: [u8; 4] = [0, 0, 0, 255];

/// Nearest-surface normalized depth.
pub fn rasterize_depth<T: Real>(mesh: &Mesh<T>, camera: &Camera<T>) -> DepthBuffer<T> {
    rasterize_visibility(mesh, &camera.frame()).depth
}

/// Nearest-surface face normal (camera space, +z toward the viewer) and
/// depth, packed into 8 bits per channel.
pub fn rasterize_normal_depth<T: Real>(mesh: &Mesh<T>, camera: &Camera<T>) -> NormalDepthMap {
    let frame = camera.frame();
    let vis = rasterize_visibility(mesh, &frame);
    normal_depth_from_visibility(&vis, mesh, &frame)
}

pub fn normal_depth_from_visibility<T: Real>(
    vis: &VisibilityBuffer<T>,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
) -> NormalDepthMap {
    let cam_normals: Vec<Vec3<T>> = mesh
        .face_normals()
        .par_iter()
        .map(|&n| camera_space_normal(frame, n))
        .collect();
    vis.face
        .zip_map(&vis.depth, |f, d| {
            if f == NO_FACE {
                BACKGROUND_NORMAL_DEPTH
            } else {
                pack_normal_depth(cam_normals[f as usize], d)
            }
        })
        .expect("visibility buffers share dimensions")
}

/// World normal to camera space with +z pointing at the viewer.
#[inline]
pub fn camera_space_normal<T: Real>(frame: &CameraFrame<T>, n: Vec3<T>) -> Vec3<T> {
    let v = frame.rotate_to_view(n);
    Vec3::new(v.x, v.y, -v.z)
}

#[inline]
pub fn pack_normal_depth<T: Real>(normal: Vec3<T>, depth: T) -> [u8; 4] {
    let enc = |c: T| crate::buffer::quantize((c + T::one()) * T::lit(0.5));
    [enc(normal.x), enc(normal.y), enc(normal.z), crate::buffer::quantize(depth)]
}

#[inline]
pub fn unpack_normal_depth<T: Real>(code: [u8; 4]) -> (Vec3<T>, T) {
    let dec = |c: u8| T::lit(c as f64 / 255.0 * 2.0 - 1.0);
    (
        Vec3::new(dec(code[0]), dec(code[1]), dec(code[2])),
        T::lit(code[3] as f64 / 255.0),
    )
}

/// Everything a shader may need about the nearest surface at a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment<T> {
    pub x: usize,
    pub y: usize,
    pub face: u32,
    pub position: Vec3<T>,
    /// World-space unit face normal.
    pub normal: Vec3<T>,
    /// Unit vector from the surface toward the eye.
    pub to_eye: Vec3<T>,
    pub depth: T,
}

/// Per-pixel shading contract used by [`rasterize_shaded`].
pub trait FragmentShader<T>: Sync {
    fn shade(&self, fragment: &Fragment<T>) -> T;
}

impl<T, F> FragmentShader<T> for F
where
    F: Fn(&Fragment<T>) -> T + Sync,
{
    fn shade(&self, fragment: &Fragment<T>) -> T {
        self(fragment)
    }
}

/// Shade the nearest surface at every pixel; uncovered pixels get
/// `background`. Output is clamped to `[0, 1]`.
pub fn rasterize_shaded<T: Real>(
    mesh: &Mesh<T>,
    camera: &Camera<T>,
    shader: &impl FragmentShader<T>,
    background: T,
) -> IntensityImage<T> {
    let frame = camera.frame();
    let vis = rasterize_visibility(mesh, &frame);
    shade_visibility(&vis, mesh, &frame, shader, background)
}

pub fn shade_visibility<T: Real>(
    vis: &VisibilityBuffer<T>,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    shader: &impl FragmentShader<T>,
    background: T,
) -> IntensityImage<T> {
    Image::from_fn(vis.face.width(), vis.face.height(), |x, y| {
        match fragment_at(vis, mesh, frame, x, y) {
            Some(frag) => shader.shade(&frag).clamp01(),
            None => background.clamp01(),
        }
    })
}

/// Reconstruct the fragment at pixel `(x, y)`: the pixel-centre ray is
/// intersected with the plane of the covering face.
pub fn fragment_at<T: Real>(
    vis: &VisibilityBuffer<T>,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
    x: usize,
    y: usize,
) -> Option<Fragment<T>> {
    let face = vis.face.get(x, y);
    if face == NO_FACE {
        return None;
    }
    let normal = mesh.face_normal(face as usize);
    let half = T::lit(0.5);
    let (origin, dir) = frame.pixel_ray(T::lit(x as f64) + half, T::lit(y as f64) + half);
    let denom = normal.dot(dir);
    let position = if denom.abs() > T::epsilon() {
        let t = normal.dot(mesh.face_centroid(face as usize) - origin) / denom;
        origin + dir * t
    } else {
        // Edge-on face: fall back to the stored depth along the ray.
        let z = frame.view_depth(vis.depth.get(x, y));
        origin + dir * (z / dir.dot(frame.forward))
    };
    Some(Fragment {
        x,
        y,
        face,
        position,
        normal,
        to_eye: frame.toward_eye(position),
        depth: vis.depth.get(x, y),
    })
}

/// World position of the visible surface per pixel (`None` on background).
pub fn surface_positions<T: Real>(
    vis: &VisibilityBuffer<T>,
    mesh: &Mesh<T>,
    frame: &CameraFrame<T>,
) -> Image<Option<Vec3<T>>> {
    Image::from_fn(vis.face.width(), vis.face.height(), |x, y| {
        fragment_at(vis, mesh, frame, x, y).map(|f| f.position)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::Viewport;

    #[test]
    fn empty_mesh_is_background() {
        let cam = fixtures::front_camera::<f64>(5.0, 40.0, Viewport::square(32));
        let depth = rasterize_depth(&Mesh::empty(), &cam);
        assert!(depth.pixels().iter().all(|&d| d == 1.0));
        let nd = rasterize_normal_depth(&Mesh::empty(), &cam);
        assert!(nd.pixels().iter().all(|&c| c == BACKGROUND_NORMAL_DEPTH));
        let shaded = rasterize_shaded(&Mesh::<f64>::empty(), &cam, &|_: &Fragment<f64>| 0.3, 0.62);
        assert!(shaded.pixels().iter().all(|&v| v == 0.62));
    }

    #[test]
    fn pack_round_trip_error_bound() {
        for (n, d) in [
            (Vec3::new(0.0f64, 0.0, 1.0), 0.5),
            (Vec3::new(0.6, -0.8, 0.0), 0.0),
            (Vec3::new(-1.0, 0.0, 0.0), 1.0),
        ] {
            let (m, e) = unpack_normal_depth::<f64>(pack_normal_depth(n, d));
            assert!((m.x - n.x).abs() <= 1.0 / 255.0 + 1e-12);
            assert!((m.y - n.y).abs() <= 1.0 / 255.0 + 1e-12);
            assert!((m.z - n.z).abs() <= 1.0 / 255.0 + 1e-12);
            assert!((e - d).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn constant_shader_fills_covered_pixels() {
        let cam = fixtures::front_camera::<f64>(5.0, 40.0, Viewport::square(64));
        let img = rasterize_shaded(&fixtures::cube(), &cam, &|_: &Fragment<f64>| 0.55, 0.62);
        let covered = img.pixels().iter().filter(|&&v| v == 0.55).count();
        let bg = img.pixels().iter().filter(|&&v| v == 0.62).count();
        assert!(covered > 0);
        assert_eq!(covered + bg, 64 * 64);
    }
}
