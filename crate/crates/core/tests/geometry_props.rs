mod common;

use std::collections::BTreeSet;

use inkshade::contour::{classify_crease_edges, classify_silhouette_edges};
use inkshade::fixtures;
use inkshade::geometry::{Camera, DirectionalLight, EdgeAdjacency, EdgeFaces, Mesh, Vec3};
use inkshade::shading::{shade_point, ShadingParams};
use proptest::prelude::*;

fn pairs(adj: &EdgeAdjacency, ids: &[inkshade::geometry::EdgeId]) -> BTreeSet<[u32; 2]> {
    ids.iter().map(|&e| adj.edge(e).vertices).collect()
}

/// Edge vertex pairs with the incident faces resolved back to the original
/// face numbering through `order`.
fn edge_set(adj: &EdgeAdjacency, order: &[usize]) -> BTreeSet<([u32; 2], Vec<usize>)> {
    adj.edges()
        .iter()
        .map(|e| {
            let mut faces = match e.faces {
                EdgeFaces::Border(f) => vec![order[f as usize]],
                EdgeFaces::Interior(a, b) => vec![order[a as usize], order[b as usize]],
            };
            faces.sort();
            (e.vertices, faces)
        })
        .collect()
}

fn shift(cam: &Camera<f64>, offset: Vec3<f64>) -> Camera<f64> {
    Camera {
        position: cam.position + offset,
        look_at: cam.look_at + offset,
        ..*cam
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_ignores_face_order(order in Just((0..320usize).collect::<Vec<_>>()).prop_shuffle()) {
        let mesh = fixtures::icosphere::<f64>(2);
        let identity: Vec<usize> = (0..mesh.face_count()).collect();
        let base = edge_set(&EdgeAdjacency::build(&mesh).unwrap(), &identity);
        let shuffled = edge_set(&EdgeAdjacency::build(&mesh.permuted_faces(&order)).unwrap(), &order);
        prop_assert_eq!(base, shuffled);
    }

    #[test]
    fn silhouettes_follow_rigid_translation(seed in any::<u64>(), dx in -5.0f64..5.0, dy in -5.0f64..5.0, dz in -5.0f64..5.0) {
        let mesh = fixtures::icosphere::<f64>(1);
        let adj = EdgeAdjacency::build(&mesh).unwrap();
        let cam = common::random_camera(&mesh, &mut common::rng(seed), 32);
        let offset = Vec3::new(dx, dy, dz);
        let moved = mesh.translated(offset);
        prop_assert_eq!(
            pairs(&adj, &classify_silhouette_edges(&mesh, &adj, &cam)),
            pairs(&adj, &classify_silhouette_edges(&moved, &adj, &shift(&cam, offset)))
        );
    }

    #[test]
    fn silhouettes_survive_winding_flip(seed in any::<u64>()) {
        for mesh in [fixtures::cube::<f64>(), fixtures::icosphere(1), fixtures::tetrahedron()] {
            let adj = EdgeAdjacency::build(&mesh).unwrap();
            let flipped = mesh.flipped();
            let fadj = EdgeAdjacency::build(&flipped).unwrap();
            let cam = common::random_camera(&mesh, &mut common::rng(seed), 32);
            prop_assert_eq!(
                pairs(&adj, &classify_silhouette_edges(&mesh, &adj, &cam)),
                pairs(&fadj, &classify_silhouette_edges(&flipped, &fadj, &cam))
            );
        }
    }

    #[test]
    fn creases_are_scale_invariant(s in 0.01f64..100.0, threshold in 1.0f64..179.0) {
        let mesh = fixtures::icosphere::<f64>(1).merged(&fixtures::cube::<f64>().translated(Vec3::new(3.0, 0.0, 0.0)));
        let adj = EdgeAdjacency::build(&mesh).unwrap();
        prop_assert_eq!(
            classify_crease_edges(&mesh, &adj, threshold),
            classify_crease_edges(&mesh.scaled(s), &adj, threshold)
        );
    }

    #[test]
    fn lit_values_stay_in_the_shading_band(
        n in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        az in -180.0f64..180.0,
        el in 0.5f64..90.0,
    ) {
        let n = Vec3::new(n.0, n.1, n.2);
        prop_assume!(n.norm() > 1e-3);
        let n = n * (1.0 / n.norm());
        let l = DirectionalLight::from_angles(az, el).unwrap().direction();
        let p = ShadingParams { ks: 0.0, ..ShadingParams::default() };
        let v = shade_point(n, l, Vec3::new(0.0, 0.0, 1.0), &p);
        prop_assert!((0.55 - 1e-12..=0.80 + 1e-12).contains(&v));
    }
}

#[test]
fn adjacency_build_is_idempotent() {
    let mesh: Mesh<f64> = fixtures::bumpy_torus(12, 8, 0.05);
    let a = EdgeAdjacency::build(&mesh).unwrap();
    let b = EdgeAdjacency::build(&mesh).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * mesh.face_count() / 2);
}

#[test]
fn light_at_45_degrees_casts_equal_length_shadows() {
    let light = DirectionalLight::from_angles(45.0f64, 45.0).unwrap();
    assert!((light.ground_shadow_length(1.0) - 1.0).abs() < 1e-12);
    let d = light.direction();
    assert!((d.y - (0.5f64).sqrt()).abs() < 1e-12);
    assert!(DirectionalLight::from_angles(0.0f64, 0.0).is_err());
    assert!(DirectionalLight::from_angles(0.0f64, 90.5).is_err());
}
