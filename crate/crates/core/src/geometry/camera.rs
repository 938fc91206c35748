use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Projection<T> {
    Perspective { fov_y_deg: T },
    Orthographic { half_height: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub const MIN_DIM: u32 = 16;

    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn square(size: u32) -> Self {
        Self::new(size, size)
    }

    pub fn scaled(self, factor: u32) -> Self {
        Self::new(self.width * factor, self.height * factor)
    }

    pub fn pixel_count(self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Pinhole or orthographic camera. The view looks from `position` toward
/// `look_at`; `near`/`far` bound the normalized depth range `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera<T> {
    pub position: Vec3<T>,
    pub look_at: Vec3<T>,
    pub up: Vec3<T>,
    pub projection: Projection<T>,
    pub viewport: Viewport,
    pub near: T,
    pub far: T,
}

impl<T: Real> Camera<T> {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: String| Err(GeometryError::InvalidCamera(msg));
        if !(self.position.is_finite() && self.look_at.is_finite() && self.up.is_finite()) {
            return bad("non-finite camera vectors".into());
        }
        if !(self.near > T::zero() && self.far > self.near && self.far.is_finite()) {
            return bad(format!("need 0 < near < far, got near={} far={}", self.near, self.far));
        }
        if self.viewport.width < Viewport::MIN_DIM || self.viewport.height < Viewport::MIN_DIM {
            return bad(format!(
                "viewport {}x{} below minimum {}",
                self.viewport.width,
                self.viewport.height,
                Viewport::MIN_DIM
            ));
        }
        match self.projection {
            Projection::Perspective { fov_y_deg } => {
                if !(fov_y_deg > T::one() && fov_y_deg < T::lit(179.0)) {
                    return bad(format!("fov_y {fov_y_deg} outside (1, 179) degrees"));
                }
            }
            Projection::Orthographic { half_height } => {
                if !(half_height > T::zero() && half_height.is_finite()) {
                    return bad(format!("orthographic half-height {half_height} must be > 0"));
                }
            }
        }
        let forward = self.look_at - self.position;
        if forward.normalized().is_none() {
            return bad("look_at coincides with position".into());
        }
        if forward.cross(self.up).normalized().is_none() {
            return bad("up vector is parallel to the view direction".into());
        }
        Ok(())
    }

    pub fn is_orthographic(&self) -> bool {
        matches!(self.projection, Projection::Orthographic { .. })
    }

    /// Derived view basis and projection constants. The camera must validate.
    pub fn frame(&self) -> CameraFrame<T> {
        let forward = (self.look_at - self.position)
            .normalized()
            .expect("validated camera has a view direction");
        let right = forward
            .cross(self.up)
            .normalized()
            .expect("validated camera has a non-parallel up");
        let up = right.cross(forward);
        let aspect = T::lit(self.viewport.width as f64) / T::lit(self.viewport.height as f64);
        let half_extent = match self.projection {
            Projection::Perspective { fov_y_deg } => (fov_y_deg.to_radians() * T::lit(0.5)).tan(),
            Projection::Orthographic { half_height } => half_height,
        };
        CameraFrame {
            position: self.position,
            right,
            up,
            forward,
            half_extent,
            aspect,
            width: T::lit(self.viewport.width as f64),
            height: T::lit(self.viewport.height as f64),
            near: self.near,
            far: self.far,
            orthographic: self.is_orthographic(),
        }
    }

    /// Perspective camera orbiting a bounding sphere. `azimuth_deg` 0 looks
    /// from +z, 90 from +x; `elevation_deg` raises the eye above the
    /// horizontal plane.
    pub fn orbit(
        center: Vec3<T>,
        radius: T,
        viewport: Viewport,
        fov_y_deg: T,
        azimuth_deg: T,
        elevation_deg: T,
    ) -> Self {
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
        let dir = Vec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos());
        let radius = radius.max(T::lit(1e-6));
        let half = (fov_y_deg.to_radians() * T::lit(0.5)).min(
            ((fov_y_deg.to_radians() * T::lit(0.5)).tan()
                * T::lit(viewport.width as f64 / viewport.height as f64))
            .atan(),
        );
        let distance = radius / half.sin() * T::lit(1.05);
        let up = if el.cos().abs() < T::lit(1e-6) {
            Vec3::new(T::zero(), T::zero(), -T::one())
        } else {
            Vec3::new(T::zero(), T::one(), T::zero())
        };
        // A 1:100 near/far ratio keeps the slope of smooth surfaces small in
        // 8-bit normalized depth, so only real discontinuities read as lines.
        let near = distance * T::lit(0.1);
        Self {
            position: center + dir * distance,
            look_at: center,
            up,
            projection: Projection::Perspective { fov_y_deg },
            viewport,
            near,
            far: distance * T::lit(10.0),
        }
    }

    pub fn cast<U: Real>(&self) -> Camera<U> {
        let projection = match self.projection {
            Projection::Perspective { fov_y_deg } => Projection::Perspective {
                fov_y_deg: U::lit(fov_y_deg.as_f64()),
            },
            Projection::Orthographic { half_height } => Projection::Orthographic {
                half_height: U::lit(half_height.as_f64()),
            },
        };
        Camera {
            position: self.position.cast(),
            look_at: self.look_at.cast(),
            up: self.up.cast(),
            projection,
            viewport: self.viewport,
            near: U::lit(self.near.as_f64()),
            far: U::lit(self.far.as_f64()),
        }
    }
}

/// A point mapped into the viewport: `x`, `y` in pixels (origin at the
/// top-left corner, y down) and `z` the distance along the view axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame<T> {
    pub position: Vec3<T>,
    pub right: Vec3<T>,
    pub up: Vec3<T>,
    pub forward: Vec3<T>,
    /// `tan(fov_y / 2)` for perspective, the half-height for orthographic.
    pub half_extent: T,
    pub aspect: T,
    pub width: T,
    pub height: T,
    pub near: T,
    pub far: T,
    pub orthographic: bool,
}

impl<T: Real> CameraFrame<T> {
    /// World to view coordinates: x right, y up, z forward (distance).
    #[inline]
    pub fn to_view(&self, p: Vec3<T>) -> Vec3<T> {
        let d = p - self.position;
        Vec3::new(d.dot(self.right), d.dot(self.up), d.dot(self.forward))
    }

    #[inline]
    pub fn rotate_to_view(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(v.dot(self.right), v.dot(self.up), v.dot(self.forward))
    }

    /// View-space point to screen. Perspective points must have `z > 0`.
    #[inline]
    pub fn view_to_screen(&self, v: Vec3<T>) -> ScreenPoint<T> {
        let (nx, ny) = if self.orthographic {
            (v.x / (self.half_extent * self.aspect), v.y / self.half_extent)
        } else {
            (
                v.x / (v.z * self.half_extent * self.aspect),
                v.y / (v.z * self.half_extent),
            )
        };
        let half = T::lit(0.5);
        ScreenPoint {
            x: (nx + T::one()) * half * self.width,
            y: (T::one() - ny) * half * self.height,
            z: v.z,
        }
    }

    #[inline]
    pub fn project(&self, p: Vec3<T>) -> ScreenPoint<T> {
        self.view_to_screen(self.to_view(p))
    }

    /// Linear depth mapping `near → 0`, `far → 1`.
    #[inline]
    pub fn normalized_depth(&self, z: T) -> T {
        (z - self.near) / (self.far - self.near)
    }

    #[inline]
    pub fn view_depth(&self, normalized: T) -> T {
        self.near + normalized * (self.far - self.near)
    }

    /// Ray through a continuous pixel position. The direction is unit length.
    pub fn pixel_ray(&self, px: T, py: T) -> (Vec3<T>, Vec3<T>) {
        let two = T::lit(2.0);
        let nx = px / self.width * two - T::one();
        let ny = T::one() - py / self.height * two;
        if self.orthographic {
            let origin = self.position
                + self.right * (nx * self.half_extent * self.aspect)
                + self.up * (ny * self.half_extent);
            (origin, self.forward)
        } else {
            let dir = self.forward
                + self.right * (nx * self.half_extent * self.aspect)
                + self.up * (ny * self.half_extent);
            (self.position, dir.normalized().expect("finite pixel ray"))
        }
    }

    /// Vector from the eye toward `p` as used by the facing test. For an
    /// orthographic camera every point is seen along `forward`.
    #[inline]
    pub fn eye_to(&self, p: Vec3<T>) -> Vec3<T> {
        if self.orthographic {
            self.forward
        } else {
            p - self.position
        }
    }

    /// Unit vector from `p` toward the eye.
    #[inline]
    pub fn toward_eye(&self, p: Vec3<T>) -> Vec3<T> {
        if self.orthographic {
            -self.forward
        } else {
            (self.position - p).normalized().unwrap_or(-self.forward)
        }
    }
}
