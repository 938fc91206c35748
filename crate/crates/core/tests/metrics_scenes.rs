mod common;

use inkshade::fixtures::{self, PoleFixture};
use inkshade::geometry::{DirectionalLight, Viewport};
use inkshade::pipeline::{render_frame, StyleParams};
use inkshade::stylemetrics::{shadow_length_ratio, style_report, MetricError, PoleScene};

fn ratio_at(elevation: f64, azimuth: f64) -> Result<f64, MetricError> {
    let fx = PoleFixture::default();
    let mesh = fx.mesh::<f64>();
    let cam = fx.camera::<f64>(Viewport::square(384));
    let params = StyleParams {
        light_elevation_deg: elevation,
        light_azimuth_deg: azimuth,
        ..StyleParams::default()
    };
    let f = render_frame(&mesh, &cam, &params).unwrap();
    let light = DirectionalLight::from_angles(azimuth, elevation).unwrap();
    shadow_length_ratio(&f, PoleScene { fixture: &fx, mesh: &mesh, camera: &cam, light: &light })
}

#[test]
fn shadow_ratio_follows_cotangent() {
    for el in [30.0, 40.0, 45.0, 55.0, 63.435] {
        let expect = 1.0 / f64::to_radians(el).tan();
        let got = ratio_at(el, 45.0).unwrap();
        assert!((got - expect).abs() <= 0.05 * expect, "elevation {el}: {got} vs {expect}");
    }
}

#[test]
fn shadow_ratio_does_not_depend_on_azimuth() {
    for az in [0.0, 30.0, 120.0, 200.0] {
        let got = ratio_at(45.0, az).unwrap();
        assert!((got - 1.0).abs() <= 0.05, "azimuth {az}: {got}");
    }
}

#[test]
fn overhead_light_leaves_no_shadow_to_measure() {
    assert_eq!(ratio_at(90.0, 45.0), Err(MetricError::NoShadow));
}

#[test]
fn perturbed_line_band_fails_the_gate() {
    let mesh = fixtures::cube::<f64>();
    let cam = common::reference_view(&mesh, 256);
    let params = StyleParams {
        line_b_min: 0.1,
        ..StyleParams::default()
    };
    let f = render_frame(&mesh, &cam, &params).unwrap();
    let report = style_report(&f, &params, None).unwrap();
    let gate = report.gates.iter().find(|g| g.name == "line_band_mass").unwrap();
    assert!(!gate.passed, "{gate:?}");
    assert!(!report.passed);

    let f = render_frame(&mesh, &cam, &StyleParams::default()).unwrap();
    let report = style_report(&f, &StyleParams::default(), None).unwrap();
    assert!(report.line_band_mass.unwrap() >= 0.95);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert!(json["gates"].as_array().unwrap().len() >= 3);
    assert_eq!(json["line_histogram"]["bins"].as_array().unwrap().len(), 256);
}
