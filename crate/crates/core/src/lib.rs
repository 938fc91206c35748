//! Deterministic CPU renderer for a pen-and-wash drawing style: contour
//! lines from mesh edges and a normal-depth map, flat ambient-heavy shading
//! and soft-edged shadow maps, plus image metrics that check the result.
//!
//! Everything is generic over the scalar type through [`Real`]; the `d` and
//! `f` modules pin it to `f64` and `f32`.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod buffer;
pub mod contour;
pub mod fixtures;
pub mod geometry;
pub mod linecomposite;
pub mod pipeline;
pub mod rasterizer;
pub mod scalar;
pub mod shading;
pub mod shadowing;
pub mod stylemetrics;

pub use buffer::{BufferError, Image};
pub use scalar::Real;

macro_rules! scalar_aliases {
    ($t:ty) => {
        pub type Vec3 = crate::geometry::Vec3<$t>;
        pub type Mesh = crate::geometry::Mesh<$t>;
        pub type Camera = crate::geometry::Camera<$t>;
        pub type CameraFrame = crate::geometry::CameraFrame<$t>;
        pub type Projection = crate::geometry::Projection<$t>;
        pub type DirectionalLight = crate::geometry::DirectionalLight<$t>;
        pub type PreparedMesh = crate::pipeline::PreparedMesh<$t>;
        pub type RenderFrame = crate::pipeline::RenderFrame<$t>;
        pub type ShadingParams = crate::shading::ShadingParams<$t>;
        pub type ShadowMap = crate::shadowing::ShadowMap<$t>;
        pub type VisibleSegment = crate::contour::VisibleSegment<$t>;
        pub type IntensityImage = crate::rasterizer::IntensityImage<$t>;
    };
}

/// `f64` instantiations.
pub mod d {
    scalar_aliases!(f64);
}

/// `f32` instantiations.
pub mod f {
    scalar_aliases!(f32);
}
