use super::{GeometryError, Vec3};
use crate::scalar::Real;

/// Distant light given by two angles. The world is y-up with the ground
/// plane at `y = 0`.
///
/// `azimuth_deg` is measured in the ground plane from +x toward +z (toward
/// a default camera placed on +z); `elevation_deg` is the angle above the
/// ground plane. `direction` points from the scene toward the light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalLight<T> {
    azimuth_deg: T,
    elevation_deg: T,
    direction: Vec3<T>,
}

impl<T: Real> DirectionalLight<T> {
    /// Elevation must lie in `(0°, 90°]`; 90° is the overhead limit.
    pub fn from_angles(azimuth_deg: T, elevation_deg: T) -> Result<Self, GeometryError> {
        if !(elevation_deg > T::zero() && elevation_deg <= T::lit(90.0)) || !azimuth_deg.is_finite()
        {
            return Err(GeometryError::InvalidLight(format!(
                "elevation {elevation_deg} outside (0, 90] degrees"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
            direction: direction_from_angles(azimuth_deg, elevation_deg),
        })
    }

    #[inline]
    pub fn direction(&self) -> Vec3<T> {
        self.direction
    }

    pub fn azimuth_deg(&self) -> T {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> T {
        self.elevation_deg
    }

    /// Horizontal unit vector along which ground shadows extend (away from
    /// the light).
    pub fn shadow_heading(&self) -> Vec3<T> {
        let az = self.azimuth_deg.to_radians();
        Vec3::new(-az.cos(), T::zero(), -az.sin())
    }

    /// Length of the ground shadow cast by a vertical pole of `height`.
    pub fn ground_shadow_length(&self, height: T) -> T {
        if self.elevation_deg >= T::lit(90.0) {
            return T::zero();
        }
        height / self.elevation_deg.to_radians().tan()
    }
}

fn direction_from_angles<T: Real>(azimuth_deg: T, elevation_deg: T) -> Vec3<T> {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    let horizontal = if elevation_deg >= T::lit(90.0) {
        T::zero()
    } else {
        el.cos()
    };
    Vec3::new(horizontal * az.cos(), el.sin(), horizontal * az.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_five_degrees_vertical_component() {
        let l = DirectionalLight::from_angles(45.0f64, 45.0).unwrap();
        assert!((l.direction().y - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(l.direction().is_unit());
    }

    #[test]
    fn overhead_light_casts_no_ground_shadow() {
        let l = DirectionalLight::from_angles(10.0f64, 90.0).unwrap();
        assert_eq!(l.direction(), Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(l.ground_shadow_length(3.0), 0.0);
    }

    #[test]
    fn unit_pole_at_45_degrees_casts_unit_shadow() {
        let l = DirectionalLight::from_angles(45.0f64, 45.0).unwrap();
        assert!((l.ground_shadow_length(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elevation_out_of_range_is_rejected() {
        assert!(DirectionalLight::from_angles(0.0f64, 0.0).is_err());
        assert!(DirectionalLight::from_angles(0.0f64, 95.0).is_err());
        assert!(DirectionalLight::from_angles(0.0f64, -10.0).is_err());
    }

    #[test]
    fn angles_reproduce_direction() {
        for (az, el) in [(0.0f64, 10.0f64), (45.0, 45.0), (200.0, 70.0), (-30.0, 89.0)] {
            let l = DirectionalLight::from_angles(az, el).unwrap();
            let d = l.direction();
            let el2 = d.y.asin().to_degrees();
            let az2 = d.z.atan2(d.x).to_degrees();
            assert!((el2 - el).abs() < 1e-6);
            assert!(((az2 - az).rem_euclid(360.0)).min((az - az2).rem_euclid(360.0)) < 1e-6);
        }
    }

    #[test]
    fn shadow_heading_points_away_from_light() {
        let l = DirectionalLight::from_angles(45.0f64, 30.0).unwrap();
        assert!(l.shadow_heading().dot(l.direction()) < 0.0);
        assert!(l.shadow_heading().y == 0.0);
    }
}
