//! Image statistics that check a render against the target style:
//! brightness histograms, line band mass, stroke width, the dark floor and
//! the shadow-length ratio of the pole fixture.

use std::fmt::Write as _;

use serde::Serialize;

use crate::buffer::{BufferError, Image};
use crate::fixtures::PoleFixture;
use crate::geometry::{Camera, DirectionalLight, Mesh};
use crate::pipeline::{frame_positions, RenderFrame, StyleParams};
use crate::rasterizer::NO_FACE;
use crate::scalar::Real;

/// Target line brightness band of the reference drawings.
pub const TARGET_LINE_BAND: (f64, f64) = (0.4, 0.8);
/// Slack around the band for quantization.
pub const BAND_SLACK: f64 = 0.02;
/// Line-value pixels at or above this are the ignored smoothing tail.
pub const TAIL_CUTOFF: f64 = 0.95;
pub const MIN_LINE_BAND_MASS: f64 = 0.95;
pub const LINE_WIDTH_RANGE: (f64, f64) = (1.0, 2.0);
pub const LIT_BAND: (f64, f64) = (0.6, 0.8);
pub const SHADOW_RATIO_TOLERANCE: f64 = 0.05;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("no line pixels")]
    NoLinePixels,
    #[error("no shadow detected on the ground plane")]
    NoShadow,
    #[error("buffer mismatch: {0}")]
    Buffer(String),
}

impl From<BufferError> for MetricError {
    fn from(e: BufferError) -> Self {
        MetricError::Buffer(e.to_string())
    }
}

/// 256 equal bins over `[0, 1]`; bin `k` holds `[k/256, (k+1)/256)` and
/// the last bin also takes 1.0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram256 {
    pub bins: Vec<u64>,
    pub total: u64,
    pub masked: bool,
}

#[inline]
pub fn bin_of<T: Real>(v: T) -> usize {
    (v.clamp01().as_f64() * 256.0).floor().min(255.0) as usize
}

pub fn brightness_histogram<T: Real>(
    img: &Image<T>,
    mask: Option<&Image<bool>>,
) -> Result<Histogram256, BufferError> {
    if let Some(m) = mask {
        img.check_dims(m)?;
    }
    let mut bins = vec![0u64; 256];
    for (i, &v) in img.pixels().iter().enumerate() {
        if mask.is_none_or(|m| m.pixels()[i]) {
            bins[bin_of(v)] += 1;
        }
    }
    Ok(Histogram256 {
        total: bins.iter().sum(),
        bins,
        masked: mask.is_some(),
    })
}

impl Histogram256 {
    /// `bin,lo,hi,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,lo,hi,count\n");
        for (k, c) in self.bins.iter().enumerate() {
            let _ = writeln!(out, "{k},{:.6},{:.6},{c}", k as f64 / 256.0, (k + 1) as f64 / 256.0);
        }
        out
    }

    /// Fraction of the counted pixels whose bin lies inside `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> Option<f64> {
        if self.total == 0 {
            return None;
        }
        let inside: u64 = (bin_of(lo)..=bin_of(hi)).map(|k| self.bins[k]).sum();
        Some(inside as f64 / self.total as f64)
    }
}

/// Pixels darker than the tail cutoff.
pub fn line_mask<T: Real>(line_value: &Image<T>, tail_cutoff: T) -> Image<bool> {
    line_value.map(|v| v < tail_cutoff)
}

/// Among line pixels (below `tail_cutoff`), the fraction within
/// `[b_min − 0.02, b_max + 0.02]`. `None` when there are no line pixels.
pub fn line_band_mass<T: Real>(line_value: &Image<T>, b_min: T, b_max: T, tail_cutoff: T) -> Option<f64> {
    let slack = T::lit(BAND_SLACK);
    let (lo, hi) = (b_min - slack, b_max + slack);
    let (mut lines, mut inside) = (0usize, 0usize);
    for &v in line_value.pixels() {
        if v < tail_cutoff {
            lines += 1;
            if v >= lo && v <= hi {
                inside += 1;
            }
        }
    }
    (lines > 0).then(|| inside as f64 / lines as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineWidth {
    pub median_px: f64,
    pub p90_px: f64,
    pub samples: usize,
}

/// Stroke width at every line pixel, measured across the stroke.
///
/// The local stroke direction is the principal axis of the line pixels in a
/// 7×7 window. The run through the pixel along whichever image axis is
/// closer to the stroke normal is projected onto that normal, giving the
/// perpendicular run length (at least one pixel).
pub fn estimate_line_width<T: Real>(line_value: &Image<T>, tail_cutoff: T) -> Option<LineWidth> {
    let mask = line_mask(line_value, tail_cutoff);
    let (w, h) = mask.dims();
    let mut horiz = vec![0u32; w * h];
    let mut vert = vec![0u32; w * h];
    for y in 0..h {
        let mut x = 0;
        while x < w {
            if !mask.get(x, y) {
                x += 1;
                continue;
            }
            let start = x;
            while x < w && mask.get(x, y) {
                x += 1;
            }
            horiz[y * w + start..y * w + x].fill((x - start) as u32);
        }
    }
    for x in 0..w {
        let mut y = 0;
        while y < h {
            if !mask.get(x, y) {
                y += 1;
                continue;
            }
            let start = y;
            while y < h && mask.get(x, y) {
                y += 1;
            }
            for yy in start..y {
                vert[yy * w + x] = (y - start) as u32;
            }
        }
    }
    let widths = Image::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return f64::NAN;
        }
        let [nx, ny] = stroke_normal(&mask, x, y);
        let at = y * w + x;
        let run = if nx.abs() >= ny.abs() {
            horiz[at] as f64 * nx.abs()
        } else {
            vert[at] as f64 * ny.abs()
        };
        run.max(1.0)
    });
    let mut widths: Vec<f64> = widths.into_vec().into_iter().filter(|v| !v.is_nan()).collect();
    if widths.is_empty() {
        return None;
    }
    widths.sort_by(f64::total_cmp);
    Some(LineWidth {
        median_px: nearest_rank(&widths, 0.5),
        p90_px: nearest_rank(&widths, 0.9),
        samples: widths.len(),
    })
}

/// Unit normal of the stroke through `(x, y)`: the minor principal axis of
/// the mask pixels in the surrounding 7×7 window.
fn stroke_normal(mask: &Image<bool>, x: usize, y: usize) -> [f64; 2] {
    const R: isize = 3;
    let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for dy in -R..=R {
        for dx in -R..=R {
            let (px, py) = (x as isize + dx, y as isize + dy);
            if px < 0 || py < 0 || px as usize >= mask.width() || py as usize >= mask.height() {
                continue;
            }
            if mask.get(px as usize, py as usize) {
                let (fx, fy) = (dx as f64, dy as f64);
                n += 1.0;
                sx += fx;
                sy += fy;
                sxx += fx * fx;
                syy += fy * fy;
                sxy += fx * fy;
            }
        }
    }
    let (mx, my) = (sx / n, sy / n);
    let (cxx, cyy, cxy) = (sxx / n - mx * mx, syy / n - my * my, sxy / n - mx * my);
    // Direction of the major axis; the normal is perpendicular to it.
    let theta = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    [-theta.sin(), theta.cos()]
}

fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Minimum 3×3 mean over pixels whose whole window is free of line pixels.
pub fn dark_floor<T: Real>(img: &Image<T>, lines: &Image<bool>) -> Result<Option<f64>, BufferError> {
    img.check_dims(lines)?;
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Ok(None);
    }
    let mut floor: Option<f64> = None;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut sum = 0.0;
            let mut clean = true;
            for dy in 0..3 {
                for dx in 0..3 {
                    let (px, py) = (x + dx - 1, y + dy - 1);
                    clean &= !lines.get(px, py);
                    sum += img.get(px, py).as_f64();
                }
            }
            if clean {
                let mean = sum / 9.0;
                floor = Some(floor.map_or(mean, |f| f.min(mean)));
            }
        }
    }
    Ok(floor)
}

/// Fraction of unshadowed, line-free surface pixels whose brightness lies in
/// `[lo, hi]`.
pub fn lit_band_mass<T: Real>(frame: &RenderFrame<T>, tail_cutoff: T, band: (f64, f64)) -> Option<f64> {
    let (mut count, mut inside) = (0usize, 0usize);
    for i in 0..frame.final_gray.pixels().len() {
        let lit = frame.face.pixels()[i] != NO_FACE
            && frame.shadow_fraction.pixels()[i] == T::zero()
            && frame.line_value.pixels()[i] >= tail_cutoff;
        if lit {
            count += 1;
            let v = frame.shaded_shadowed.pixels()[i].as_f64();
            if v >= band.0 - 1e-9 && v <= band.1 + 1e-9 {
                inside += 1;
            }
        }
    }
    (count > 0).then(|| inside as f64 / count as f64)
}

/// The scene a shadow-length measurement needs besides the frame.
#[derive(Debug, Clone, Copy)]
pub struct PoleScene<'a, T> {
    pub fixture: &'a PoleFixture,
    pub mesh: &'a Mesh<T>,
    pub camera: &'a Camera<T>,
    pub light: &'a DirectionalLight<T>,
}

/// Planar shadow extent of the pole divided by its height.
///
/// Ground pixels with shadow fraction ≥ 0.5 inside a corridor along the
/// shadow heading are projected onto that heading; the farthest one, less
/// the pole's own half-footprint, is the shadow length.
pub fn shadow_length_ratio<T: Real>(frame: &RenderFrame<T>, scene: PoleScene<'_, T>) -> Result<f64, MetricError> {
    let positions = frame_positions(frame, scene.mesh, scene.camera);
    let heading = scene.light.shadow_heading();
    let (hx, hz) = (heading.x.as_f64(), heading.z.as_f64());
    let [bx, bz] = scene.fixture.base;
    let corridor = 4.0 * scene.fixture.half_width;
    let along_of = |p: &crate::geometry::Vec3<T>| (p.x.as_f64() - bx) * hx + (p.z.as_f64() - bz) * hz;
    let mut farthest: Option<(f64, usize)> = None;
    for (i, p) in positions.pixels().iter().enumerate() {
        let face = frame.face.pixels()[i];
        if face == NO_FACE || !PoleFixture::PLANE_FACES.contains(&(face as usize)) {
            continue;
        }
        if frame.shadow_fraction.pixels()[i] < T::lit(0.5) {
            continue;
        }
        let Some(p) = p else { continue };
        let (dx, dz) = (p.x.as_f64() - bx, p.z.as_f64() - bz);
        let along = along_of(p);
        let across = (-dx * hz + dz * hx).abs();
        if across <= corridor && along > 0.0 && farthest.is_none_or(|(e, _)| along > e) {
            farthest = Some((along, i));
        }
    }
    let (centre, i) = farthest.ok_or(MetricError::NoShadow)?;
    // The pixel centre sits inside the shadow; extend by half the pixel's
    // ground footprint along the heading.
    let (w, h) = positions.dims();
    let (x, y) = (i % w, i / w);
    let step = |nx: usize, ny: usize| positions.get(nx, ny).map(|q| (along_of(&q) - centre).abs());
    let half_x = if x + 1 < w { step(x + 1, y) } else { x.checked_sub(1).and_then(|nx| step(nx, y)) };
    let half_y = if y + 1 < h { step(x, y + 1) } else { y.checked_sub(1).and_then(|ny| step(x, ny)) };
    let extent = centre + 0.5 * (half_x.unwrap_or(0.0) + half_y.unwrap_or(0.0));
    let length = (extent - scene.fixture.footprint_support([hx, hz])).max(0.0);
    Ok(length / scene.fixture.height)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: Option<f64>,
    pub target: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleReport {
    pub line_band_mass: Option<f64>,
    pub dark_floor: Option<f64>,
    pub lit_band_mass: Option<f64>,
    pub median_line_width_px: Option<f64>,
    pub p90_line_width_px: Option<f64>,
    pub shadow_length_ratio: Option<f64>,
    pub line_histogram: Histogram256,
    pub gates: Vec<Gate>,
    pub passed: bool,
}

impl StyleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run every metric on a frame. Gates use the reference constants, not the
/// parameters, so a perturbed style fails them.
pub fn style_report<T: Real>(
    frame: &RenderFrame<T>,
    params: &StyleParams,
    pole: Option<PoleScene<'_, T>>,
) -> Result<StyleReport, MetricError> {
    let tail = T::lit(TAIL_CUTOFF);
    let lines = line_mask(&frame.line_value, tail);
    let band = line_band_mass(
        &frame.line_value,
        T::lit(TARGET_LINE_BAND.0),
        T::lit(TARGET_LINE_BAND.1),
        tail,
    );
    let width = estimate_line_width(&frame.line_value, tail);
    let floor = dark_floor(&frame.final_gray, &lines)?;
    let lit = lit_band_mass(frame, tail, LIT_BAND);
    let ratio = pole.map(|scene| shadow_length_ratio(frame, scene)).transpose();

    let mut gates = vec![
        Gate {
            name: "line_band_mass".into(),
            value: band,
            target: format!(">= {MIN_LINE_BAND_MASS}"),
            passed: band.is_some_and(|b| b >= MIN_LINE_BAND_MASS),
        },
        Gate {
            name: "median_line_width_px".into(),
            value: width.map(|w| w.median_px),
            target: format!("[{}, {}]", LINE_WIDTH_RANGE.0, LINE_WIDTH_RANGE.1),
            passed: width.is_some_and(|w| (LINE_WIDTH_RANGE.0..=LINE_WIDTH_RANGE.1).contains(&w.median_px)),
        },
        Gate {
            name: "dark_floor".into(),
            value: floor,
            target: format!(">= {:.4}", params.ambient - 1.0 / 255.0),
            passed: floor.is_some_and(|f| f >= params.ambient - 1.0 / 255.0),
        },
    ];
    let mut shadow_ratio = None;
    if let Some(scene) = pole {
        let expect = scene.light.ground_shadow_length(T::one()).as_f64();
        let value = ratio.as_ref().ok().copied().flatten();
        shadow_ratio = value;
        gates.push(Gate {
            name: "shadow_length_ratio".into(),
            value,
            target: format!("{expect:.4} ± {:.0}%", SHADOW_RATIO_TOLERANCE * 100.0),
            passed: value.is_some_and(|r| (r - expect).abs() <= SHADOW_RATIO_TOLERANCE * expect.max(1e-9)),
        });
    }
    Ok(StyleReport {
        line_band_mass: band,
        dark_floor: floor,
        lit_band_mass: lit,
        median_line_width_px: width.map(|w| w.median_px),
        p90_line_width_px: width.map(|w| w.p90_px),
        shadow_length_ratio: shadow_ratio,
        line_histogram: brightness_histogram(&frame.line_value, Some(&lines))?,
        passed: gates.iter().all(|g| g.passed),
        gates,
    })
}
