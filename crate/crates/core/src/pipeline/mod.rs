//! Full-frame orchestration: buffers, lines, shading, shadows and the final
//! multiplicative composition.

mod params;

pub use params::{
    params_schema, validate_params, FieldKind, FieldSchema, ParamsError, Provenance, StyleParams,
    Violation,
};

use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::buffer::{encode_png, BufferError, Image};
use crate::contour::{
    candidate_edges, classify_border_edges, classify_crease_edges, facing_flags,
    hidden_line_removal, render_geometry_lines, silhouettes_from_facing,
};
use crate::geometry::{Camera, DirectionalLight, EdgeAdjacency, EdgeId, GeometryError, Mesh, Vec3};
use crate::linecomposite::{composite_lines, detect_nd_edges, remap_line_brightness, LineImage, LineValueImage};
use crate::rasterizer::{
    normal_depth_from_visibility, rasterize_ids_with, rasterize_visibility, shade_visibility,
    surface_positions, DepthBuffer, IndexBuffer, IntensityImage, NormalDepthMap,
};
use crate::scalar::Real;
use crate::shading::{PhongShader, ShadingParams};
use crate::shadowing::{apply_shadows, build_shadow_map, compute_failure_map, pcf_filter, FailureMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Setup,
    Visibility,
    NormalDepth,
    Classify,
    IdBuffer,
    HiddenLines,
    GeometryLines,
    NdLines,
    Composite,
    Shading,
    ShadowMap,
    FailureMap,
    Pcf,
    Final,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("stage name");
        f.write_str(s.as_str().unwrap_or("stage"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct RenderError {
    pub stage: Stage,
    pub message: String,
}

impl RenderError {
    fn at(stage: Stage) -> impl FnOnce(String) -> Self {
        move |message| Self { stage, message }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub stages: Vec<StageTiming>,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RenderStats {
    pub faces: usize,
    pub edges: usize,
    pub silhouette_edges: usize,
    pub border_edges: usize,
    pub crease_edges: usize,
    pub candidate_edges: usize,
    pub visible_segments: usize,
    pub shadow_out_of_map: usize,
}

/// Switches that are not part of the style itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub shadows: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { shadows: true }
    }
}

/// A mesh with its view-independent edge data computed once.
#[derive(Debug)]
pub struct PreparedMesh<T> {
    mesh: Mesh<T>,
    adjacency: EdgeAdjacency,
    border: Vec<EdgeId>,
    crease: Mutex<Option<(u64, Arc<Vec<EdgeId>>)>>,
}

impl<T: Real> PreparedMesh<T> {
    pub fn new(mesh: Mesh<T>) -> Result<Self, GeometryError> {
        let adjacency = EdgeAdjacency::build(&mesh)?;
        let border = classify_border_edges(&adjacency);
        Ok(Self {
            mesh,
            adjacency,
            border,
            crease: Mutex::new(None),
        })
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn adjacency(&self) -> &EdgeAdjacency {
        &self.adjacency
    }

    pub fn border_edges(&self) -> &[EdgeId] {
        &self.border
    }

    /// Crease set for a threshold, cached for the last threshold asked.
    pub fn crease_edges(&self, threshold_deg: f64) -> Arc<Vec<EdgeId>> {
        let key = threshold_deg.to_bits();
        let mut cache = self.crease.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((k, set)) = cache.as_ref() {
            if *k == key {
                return Arc::clone(set);
            }
        }
        let set = Arc::new(classify_crease_edges(&self.mesh, &self.adjacency, T::lit(threshold_deg)));
        *cache = Some((key, Arc::clone(&set)));
        set
    }
}

/// Which buffer to export as an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Final,
    Lines,
    Shaded,
    Shadow,
    NormalDepth,
}

/// Every intermediate buffer of one render plus the final image.
#[derive(Debug, Clone)]
pub struct RenderFrame<T> {
    pub depth: DepthBuffer<T>,
    pub face: Image<u32>,
    pub normal_depth: NormalDepthMap,
    pub ids: IndexBuffer,
    pub geometry_lines: LineImage<T>,
    pub nd_lines: LineImage<T>,
    pub composite_lines: LineImage<T>,
    pub line_value: LineValueImage<T>,
    pub shaded: IntensityImage<T>,
    pub failure: FailureMap,
    pub shadow_fraction: Image<T>,
    pub shaded_shadowed: IntensityImage<T>,
    /// Grayscale final image before tint.
    pub final_gray: IntensityImage<T>,
    pub paper_tint: [T; 3],
    pub timings: Timings,
    pub stats: RenderStats,
}

struct Clock {
    start: Instant,
    last: Instant,
    timings: Timings,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            timings: Timings::default(),
        }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timings.stages.push(StageTiming {
            stage,
            ms: (now - self.last).as_secs_f64() * 1e3,
        });
        self.last = now;
    }

    fn finish(mut self) -> Timings {
        self.timings.total_ms = self.start.elapsed().as_secs_f64() * 1e3;
        self.timings
    }
}

/// Convenience wrapper that builds adjacency on the fly.
pub fn render_frame<T: Real>(
    mesh: &Mesh<T>,
    camera: &Camera<T>,
    params: &StyleParams,
) -> Result<RenderFrame<T>, RenderError> {
    let prepared = PreparedMesh::new(mesh.clone()).map_err(|e| RenderError::at(Stage::Setup)(e.to_string()))?;
    render_prepared(&prepared, camera, params, RenderOptions::default())
}

pub fn render_prepared<T: Real>(
    prepared: &PreparedMesh<T>,
    camera: &Camera<T>,
    params: &StyleParams,
    options: RenderOptions,
) -> Result<RenderFrame<T>, RenderError> {
    let mut clock = Clock::new();
    let setup = RenderError::at(Stage::Setup);
    let params = validate_params(params.clone()).map_err(|e| RenderError::at(Stage::Setup)(e.to_string()))?;
    camera.validate().map_err(|e| RenderError::at(Stage::Setup)(e.to_string()))?;
    let light = DirectionalLight::from_angles(T::lit(params.light_azimuth_deg), T::lit(params.light_elevation_deg))
        .map_err(|e| setup(e.to_string()))?;
    let t = |v: f64| T::lit(v);
    let mesh = &prepared.mesh;
    let adjacency = &prepared.adjacency;
    let frame = camera.frame();
    clock.lap(Stage::Setup);

    let vis = rasterize_visibility(mesh, &frame);
    clock.lap(Stage::Visibility);

    let normal_depth = normal_depth_from_visibility(&vis, mesh, &frame);
    clock.lap(Stage::NormalDepth);

    let silhouette = silhouettes_from_facing(adjacency, &facing_flags(mesh, &frame));
    let crease = prepared.crease_edges(params.crease_threshold_deg);
    let candidates: Vec<EdgeId> = candidate_edges(mesh, adjacency, &silhouette, &prepared.border, &crease)
        .into_iter()
        .map(|c| c.edge)
        .collect();
    clock.lap(Stage::Classify);

    let ids = rasterize_ids_with(&vis, &candidates, adjacency, mesh, &frame, t(params.depth_offset))
        .map_err(|e| RenderError::at(Stage::IdBuffer)(e.to_string()))?;
    clock.lap(Stage::IdBuffer);

    let segments = hidden_line_removal(
        &candidates,
        &ids,
        adjacency,
        mesh,
        &frame,
        params.samples_per_edge_min as usize,
    )
    .map_err(|e| RenderError::at(Stage::HiddenLines)(e.to_string()))?;
    clock.lap(Stage::HiddenLines);

    let geometry_lines = render_geometry_lines(&segments, adjacency, mesh, &frame, t(params.geometry_line_darkness));
    clock.lap(Stage::GeometryLines);

    let nd_lines = detect_nd_edges(&normal_depth, t(params.nd_k_depth), t(params.nd_k_normal));
    clock.lap(Stage::NdLines);

    let composite = composite_lines(
        &geometry_lines,
        &nd_lines,
        t(params.w_geom),
        t(params.w_nd),
        params.blur_radius_px as usize,
    )
    .map_err(|e| RenderError::at(Stage::Composite)(e.to_string()))?;
    let line_value = remap_line_brightness(&composite, t(params.line_threshold), t(params.line_b_min), t(params.line_b_max));
    clock.lap(Stage::Composite);

    let shader = PhongShader {
        params: ShadingParams {
            ambient: t(params.ambient),
            kd: t(params.kd),
            ks: t(params.ks),
            shininess: t(params.shininess),
        },
        light_dir: light.direction(),
    };
    let shaded = shade_visibility(&vis, mesh, &frame, &shader, t(params.background_brightness));
    clock.lap(Stage::Shading);

    let (w, h) = vis.face.dims();
    let (failure, shadow_fraction) = if options.shadows && !mesh.is_empty() {
        let sm = build_shadow_map(mesh, &light, camera.viewport)
            .map_err(|e| RenderError::at(Stage::ShadowMap)(e.to_string()))?;
        clock.lap(Stage::ShadowMap);
        let positions = surface_positions(&vis, mesh, &frame);
        let failure = compute_failure_map(&positions, &sm, t(params.shadow_bias));
        clock.lap(Stage::FailureMap);
        let fraction = pcf_filter(&failure.fails, params.pcf_radius_px as usize);
        clock.lap(Stage::Pcf);
        (failure, fraction)
    } else {
        let failure = FailureMap {
            fails: Image::new(w, h, 0),
            out_of_map: 0,
        };
        (failure, Image::new(w, h, T::zero()))
    };

    let shaded_shadowed = apply_shadows(&shaded, &shadow_fraction, t(params.ambient))
        .map_err(|e| RenderError::at(Stage::Final)(e.to_string()))?;
    let final_gray = shaded_shadowed
        .zip_map(&line_value, |s, l| s * l)
        .map_err(|e| RenderError::at(Stage::Final)(e.to_string()))?;
    clock.lap(Stage::Final);

    let stats = RenderStats {
        faces: mesh.face_count(),
        edges: adjacency.len(),
        silhouette_edges: silhouette.len(),
        border_edges: prepared.border.len(),
        crease_edges: crease.len(),
        candidate_edges: candidates.len(),
        visible_segments: segments.len(),
        shadow_out_of_map: failure.out_of_map,
    };
    Ok(RenderFrame {
        depth: vis.depth,
        face: vis.face,
        normal_depth,
        ids,
        geometry_lines,
        nd_lines,
        composite_lines: composite,
        line_value,
        shaded,
        failure,
        shadow_fraction,
        shaded_shadowed,
        final_gray,
        paper_tint: params.paper_tint.map(t),
        timings: clock.finish(),
        stats,
    })
}

impl<T: Real> RenderFrame<T> {
    pub fn width(&self) -> usize {
        self.final_gray.width()
    }

    pub fn height(&self) -> usize {
        self.final_gray.height()
    }

    pub fn is_tinted(&self) -> bool {
        self.paper_tint.iter().any(|&c| c != T::one())
    }

    /// Final image as 8-bit RGB with the tint applied per channel.
    pub fn final_rgb8(&self) -> Vec<u8> {
        self.final_gray
            .pixels()
            .iter()
            .flat_map(|&v| self.paper_tint.map(|c| crate::buffer::quantize(v * c)))
            .collect()
    }

    /// Final PNG: grayscale when the tint is neutral, RGB otherwise.
    pub fn final_png(&self) -> Result<Vec<u8>, BufferError> {
        if self.is_tinted() {
            encode_png(self.width(), self.height(), png::ColorType::Rgb, &self.final_rgb8())
        } else {
            self.final_gray.encode_png()
        }
    }

    pub fn output_png(&self, kind: OutputKind) -> Result<Vec<u8>, BufferError> {
        match kind {
            OutputKind::Final => self.final_png(),
            OutputKind::Lines => self.line_value.encode_png(),
            OutputKind::Shaded => self.shaded.encode_png(),
            OutputKind::Shadow => self.shadow_fraction.map(|s| T::one() - s).encode_png(),
            OutputKind::NormalDepth => {
                let bytes: Vec<u8> = self.normal_depth.pixels().iter().flatten().copied().collect();
                encode_png(self.width(), self.height(), png::ColorType::Rgba, &bytes)
            }
        }
    }

    /// Write every buffer into `dir`: PGM for scalar fields, PNG for the
    /// normal-depth map, ids and the final image.
    pub fn write_intermediates(&self, dir: impl AsRef<Path>) -> Result<Vec<String>, BufferError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut pgm = |name: &str, img: &Image<T>| -> Result<(), BufferError> {
            img.write_pgm(dir.join(name))?;
            written.push(name.to_string());
            Ok(())
        };
        pgm("depth.pgm", &self.depth)?;
        pgm("geometry_lines.pgm", &self.geometry_lines)?;
        pgm("nd_lines.pgm", &self.nd_lines)?;
        pgm("composite_lines.pgm", &self.composite_lines)?;
        pgm("line_value.pgm", &self.line_value)?;
        pgm("shaded.pgm", &self.shaded)?;
        pgm("failure.pgm", &self.failure.fails.map(|v| T::lit(v as f64)))?;
        pgm("shadow_fraction.pgm", &self.shadow_fraction)?;
        pgm("shaded_shadowed.pgm", &self.shaded_shadowed)?;
        let mut png_out = |name: &str, bytes: Vec<u8>| -> Result<(), BufferError> {
            std::fs::write(dir.join(name), bytes)?;
            written.push(name.to_string());
            Ok(())
        };
        png_out("normal_depth.png", self.output_png(OutputKind::NormalDepth)?)?;
        png_out("ids.png", self.ids_png()?)?;
        png_out("final.png", self.final_png()?)?;
        Ok(written)
    }

    /// Edge ids spread over hues for inspection; background is black.
    pub fn ids_png(&self) -> Result<Vec<u8>, BufferError> {
        let bytes: Vec<u8> = self
            .ids
            .ids
            .pixels()
            .iter()
            .flat_map(|&id| {
                if id == 0 {
                    [0, 0, 0]
                } else {
                    let h = id.wrapping_mul(2_654_435_761);
                    [(h >> 24) as u8 | 64, (h >> 16) as u8 | 64, (h >> 8) as u8 | 64]
                }
            })
            .collect();
        encode_png(self.width(), self.height(), png::ColorType::Rgb, &bytes)
    }

    /// Pixels where some triangle is visible.
    pub fn surface_mask(&self) -> Image<bool> {
        self.face.map(|f| f != crate::rasterizer::NO_FACE)
    }
}

/// World position of each covered pixel; `None` on background.
pub fn frame_positions<T: Real>(frame: &RenderFrame<T>, mesh: &Mesh<T>, camera: &Camera<T>) -> Image<Option<Vec3<T>>> {
    let vis = crate::rasterizer::VisibilityBuffer {
        depth: frame.depth.clone(),
        face: frame.face.clone(),
    };
    surface_positions(&vis, mesh, &camera.frame())
}
