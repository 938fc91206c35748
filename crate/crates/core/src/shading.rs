//! Intensity-only Phong: ambient paper tone plus colourless diffuse and
//! specular terms.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::rasterizer::{Fragment, FragmentShader};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadingParams<T> {
    pub ambient: T,
    pub kd: T,
    pub ks: T,
    pub shininess: T,
}

impl<T: Real> Default for ShadingParams<T> {
    fn default() -> Self {
        Self {
            ambient: T::lit(0.55),
            kd: T::lit(0.25),
            ks: T::lit(0.10),
            shininess: T::lit(24.0),
        }
    }
}

/// `clamp(ambient + kd·max(0, n·l) + ks·max(0, r·v)^shininess)` with `r`
/// the mirror of `−l` about `n`. All vectors are unit; `l` and `v` point
/// away from the surface.
#[inline]
pub fn shade_point<T: Real>(
    normal: Vec3<T>,
    light_dir: Vec3<T>,
    view_dir: Vec3<T>,
    p: &ShadingParams<T>,
) -> T {
    let ndl = normal.dot(light_dir);
    let r = normal * (T::lit(2.0) * ndl) - light_dir;
    let spec = r.dot(view_dir).max(T::zero()).powf(p.shininess);
    (p.ambient + p.kd * ndl.max(T::zero()) + p.ks * spec).clamp01()
}

/// [`shade_point`] as a per-pixel shader for a fixed light.
#[derive(Debug, Clone, Copy)]
pub struct PhongShader<T> {
    pub params: ShadingParams<T>,
    pub light_dir: Vec3<T>,
}

impl<T: Real> FragmentShader<T> for PhongShader<T> {
    fn shade(&self, f: &Fragment<T>) -> T {
        shade_point(f.normal, self.light_dir, f.to_eye, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Vec3<f64> {
        Vec3::new(0.0, 0.0, 1.0)
    }

    #[test]
    fn grazing_light_gives_ambient() {
        let p = ShadingParams::default();
        let v = shade_point(z(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), &p);
        assert!((v - 0.55).abs() < 1e-12);
    }

    #[test]
    fn head_on_light_without_specular() {
        let p = ShadingParams { ks: 0.0, ..Default::default() };
        assert!((shade_point(z(), z(), z(), &p) - 0.80).abs() < 1e-12);
    }

    #[test]
    fn light_behind_clamps_diffuse() {
        let p = ShadingParams { ks: 0.0, ..Default::default() };
        assert!((shade_point(z(), -z(), z(), &p) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn specular_peak_adds_ks() {
        let p = ShadingParams::default();
        assert!((shade_point(z(), z(), z(), &p) - 0.90).abs() < 1e-12);
    }
}
