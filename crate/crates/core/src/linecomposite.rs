//! Image-space edges from the normal-depth map and the weighted blend of both
//! line sources into a brightness multiplier.

use crate::buffer::{BufferError, Image};
use crate::rasterizer::{unpack_normal_depth, NormalDepthMap};
use crate::scalar::Real;

/// Line darkness per pixel: 0 = no line, 1 = full-strength line.
pub type LineImage<T> = Image<T>;
/// Multiplier per pixel: 1 off-line, `[b_min, b_max]` on a line.
pub type LineValueImage<T> = Image<T>;

/// Diagonal-difference edge operator.
///
/// With `A = (x−1, y−1)`, `B = (x+1, y+1)`, `C = (x+1, y−1)` and
/// `D = (x−1, y+1)` sampled with edge clamping:
/// `k_depth (|dA − dB| + |dC − dD|) + k_normal (‖nA − nB‖ + ‖nC − nD‖)`,
/// clamped to `[0, 1]`.
pub fn detect_nd_edges<T: Real>(nd: &NormalDepthMap, k_depth: T, k_normal: T) -> LineImage<T> {
    let decoded = nd.map(unpack_normal_depth::<T>);
    Image::from_fn(nd.width(), nd.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        let a = decoded.get_clamped(x - 1, y - 1);
        let b = decoded.get_clamped(x + 1, y + 1);
        let c = decoded.get_clamped(x + 1, y - 1);
        let d = decoded.get_clamped(x - 1, y + 1);
        let depth = (a.1 - b.1).abs() + (c.1 - d.1).abs();
        let normal = (a.0 - b.0).norm() + (c.0 - d.0).norm();
        (k_depth * depth + k_normal * normal).clamp01()
    })
}

/// Separable box blur of width `2r + 1` with clamp-to-edge sampling.
pub fn blur<T: Real>(img: &LineImage<T>, radius: usize) -> LineImage<T> {
    if radius == 0 {
        return img.clone();
    }
    let r = radius as isize;
    let norm = T::one() / T::lit((2 * radius + 1) as f64);
    let horizontal = Image::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        (-r..=r).map(|k| img.get_clamped(x + k, y)).fold(T::zero(), |s, v| s + v) * norm
    });
    Image::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        (-r..=r).map(|k| horizontal.get_clamped(x, y + k)).fold(T::zero(), |s, v| s + v) * norm
    })
}

/// `clamp(w_geom · blur(geom) + w_nd · nd)`.
pub fn composite_lines<T: Real>(
    geom: &LineImage<T>,
    nd: &LineImage<T>,
    w_geom: T,
    w_nd: T,
    blur_radius: usize,
) -> Result<LineImage<T>, BufferError> {
    geom.check_dims(nd)?;
    blur(geom, blur_radius).zip_map(nd, |g, n| (w_geom * g + w_nd * n).clamp01())
}

/// Darkness to brightness multiplier. Values at or below `threshold` are
/// no line (1); above it the band `(threshold, 1]` maps linearly and
/// decreasingly onto `[b_min, b_max)`.
pub fn remap_line_brightness<T: Real>(
    composite: &LineImage<T>,
    threshold: T,
    b_min: T,
    b_max: T,
) -> LineValueImage<T> {
    composite.map(|d| remap_value(d, threshold, b_min, b_max))
}

#[inline]
pub fn remap_value<T: Real>(d: T, threshold: T, b_min: T, b_max: T) -> T {
    if d <= threshold {
        T::one()
    } else {
        let s = ((d - threshold) / (T::one() - threshold)).clamp01();
        b_max - (b_max - b_min) * s
    }
}
