mod common;

use inkshade::contour::{classify_border_edges, hidden_line_removal};
use inkshade::fixtures;
use inkshade::geometry::{EdgeAdjacency, Viewport};
use inkshade::rasterizer::{rasterize_ids, IdError};

#[test]
fn edge_behind_strip_is_sound() {
    let (mesh, _) = fixtures::edge_behind_strip::<f64>(0.15);
    let cam = fixtures::front_camera(4.0, 40.0, Viewport::square(256));
    let check = common::check_hlr(&mesh, &cam, 40.0);
    assert!(check.samples > 500, "{check:?}");
    assert!(check.agreement() >= 0.99, "{check:?}");
    assert_eq!(check.bad_runs, 0, "{check:?}");
}

#[test]
fn strip_splits_the_back_edges() {
    let (mesh, _) = fixtures::edge_behind_strip::<f64>(0.15);
    let cam = fixtures::front_camera(4.0, 40.0, Viewport::square(256));
    let adj = EdgeAdjacency::build(&mesh).unwrap();
    let borders = classify_border_edges(&adj);
    let index = rasterize_ids(&borders, &adj, &mesh, &cam, 1e-3).unwrap();
    let segs = hidden_line_removal(&borders, &index, &adj, &mesh, &cam.frame(), 8).unwrap();
    // The top and bottom edges of the back rectangle are each cut in two by
    // the strip; every other border is fully visible.
    let back_faces = [0u32, 1];
    let mut per_edge = std::collections::BTreeMap::new();
    for s in &segs {
        *per_edge.entry(s.edge).or_insert(0) += 1;
    }
    let split: Vec<_> = per_edge
        .iter()
        .filter(|(e, &n)| n == 2 && back_faces.iter().any(|&f| adj.edge(**e).faces.contains(f)))
        .collect();
    assert_eq!(split.len(), 2, "{per_edge:?}");
}

#[test]
fn random_cube_views_are_sound() {
    let mesh = fixtures::cube::<f64>();
    let mut rng = common::rng(5);
    for _ in 0..8 {
        let cam = common::random_camera(&mesh, &mut rng, 128);
        let check = common::check_hlr(&mesh, &cam, 40.0);
        assert!(check.agreement() >= 0.99, "{check:?}");
        assert_eq!(check.bad_runs, 0, "{check:?}");
    }
}

#[test]
fn unknown_candidate_is_an_error() {
    let mesh = fixtures::cube::<f64>();
    let adj = EdgeAdjacency::build(&mesh).unwrap();
    let cam = fixtures::front_camera(6.0, 40.0, Viewport::square(32));
    let index = rasterize_ids(&[], &adj, &mesh, &cam, 1e-3).unwrap();
    let err = hidden_line_removal(&[inkshade::geometry::EdgeId(3)], &index, &adj, &mesh, &cam.frame(), 8).unwrap_err();
    assert_eq!(err, IdError::UnknownEdge(3));
}
