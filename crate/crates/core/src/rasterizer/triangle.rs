//! Tiled triangle rasterization into a nearest-surface visibility buffer.
//!
//! Vertices are snapped to 1/256 px and coverage is decided with integer
//! edge functions under a top-left fill rule. Each tile walks its binned
//! triangles in face order and keeps the first strictly-nearest hit, so the
//! result does not depend on how tiles are scheduled across workers.

use rayon::prelude::*;

use crate::buffer::Image;
use crate::geometry::{CameraFrame, Mesh, Vec3};
use crate::scalar::Real;

pub const SUBPIXEL_BITS: u32 = 8;
const ONE: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = ONE / 2;
/// Snapped coordinates are clamped to this guard band so edge-function
/// products stay inside i64.
const GUARD: i64 = 1 << 29;
const TILE: usize = 32;

/// Face id stored for pixels no triangle covers.
pub const NO_FACE: u32 = u32::MAX;

/// Per-pixel nearest normalized depth and the face that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityBuffer<T> {
    pub depth: Image<T>,
    pub face: Image<u32>,
}

impl<T: Real> VisibilityBuffer<T> {
    pub fn is_covered(&self, x: usize, y: usize) -> bool {
        self.face.get(x, y) != NO_FACE
    }
}

/// A screen-space triangle ready for scan conversion.
#[derive(Debug, Clone, Copy)]
struct SetupTriangle<T> {
    face: u32,
    xs: [i64; 3],
    ys: [i64; 3],
    /// Quantity affine in screen space: `1/z` (perspective) or `z`.
    key: [T; 3],
    area: i64,
    bbox: [usize; 4],
}

#[inline]
fn snap<T: Real>(v: T) -> i64 {
    let s = (v * T::lit(ONE as f64)).round();
    s.to_i64().unwrap_or(0).clamp(-GUARD, GUARD)
}

#[inline]
fn edge_fn(ax: i64, ay: i64, bx: i64, by: i64, px: i64, py: i64) -> i64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

#[inline]
fn is_top_left(ax: i64, ay: i64, bx: i64, by: i64) -> bool {
    let (dx, dy) = (bx - ax, by - ay);
    (dy == 0 && dx > 0) || dy < 0
}

/// Clip a view-space polygon against `z >= near` (Sutherland–Hodgman).
fn clip_near<T: Real>(poly: &[Vec3<T>], near: T, out: &mut Vec<Vec3<T>>) {
    out.clear();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ina, inb) = (a.z >= near, b.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.z) / (b.z - a.z);
            let mut p = a.lerp(b, t);
            p.z = near;
            out.push(p);
        }
    }
}

fn setup_face<T: Real>(
    frame: &CameraFrame<T>,
    face: u32,
    tri: [Vec3<T>; 3],
    out: &mut Vec<SetupTriangle<T>>,
) {
    let view = tri.map(|p| frame.to_view(p));
    let mut clipped = Vec::with_capacity(4);
    if view.iter().all(|v| v.z >= frame.near) {
        clipped.extend_from_slice(&view);
    } else {
        clip_near(&view, frame.near, &mut clipped);
    }
    if clipped.len() < 3 {
        return;
    }
    let (w, h) = (frame.width.to_i64().unwrap_or(0), frame.height.to_i64().unwrap_or(0));
    for k in 1..clipped.len() - 1 {
        let verts = [clipped[0], clipped[k], clipped[k + 1]];
        let screen = verts.map(|v| frame.view_to_screen(v));
        let mut xs = screen.map(|s| snap(s.x));
        let mut ys = screen.map(|s| snap(s.y));
        let mut key = verts.map(|v| if frame.orthographic { v.z } else { T::one() / v.z });
        let mut area = edge_fn(xs[0], ys[0], xs[1], ys[1], xs[2], ys[2]);
        if area == 0 {
            continue;
        }
        if area < 0 {
            xs.swap(1, 2);
            ys.swap(1, 2);
            key.swap(1, 2);
            area = -area;
        }
        let min_x = *xs.iter().min().expect("3 vertices");
        let max_x = *xs.iter().max().expect("3 vertices");
        let min_y = *ys.iter().min().expect("3 vertices");
        let max_y = *ys.iter().max().expect("3 vertices");
        // Pixel x is sampled at 256x + 128.
        let x0 = (min_x - HALF).div_euclid(ONE) + i64::from((min_x - HALF).rem_euclid(ONE) != 0);
        let x1 = (max_x - HALF).div_euclid(ONE);
        let y0 = (min_y - HALF).div_euclid(ONE) + i64::from((min_y - HALF).rem_euclid(ONE) != 0);
        let y1 = (max_y - HALF).div_euclid(ONE);
        let (x0, y0) = (x0.max(0), y0.max(0));
        let (x1, y1) = (x1.min(w - 1), y1.min(h - 1));
        if x0 > x1 || y0 > y1 {
            continue;
        }
        out.push(SetupTriangle {
            face,
            xs,
            ys,
            key,
            area,
            bbox: [x0 as usize, y0 as usize, x1 as usize, y1 as usize],
        });
    }
}

/// Rasterize every face of `mesh` (both windings) into a visibility buffer.
pub fn rasterize_visibility<T: Real>(mesh: &Mesh<T>, frame: &CameraFrame<T>) -> VisibilityBuffer<T> {
    let width = frame.width.to_usize().unwrap_or(0);
    let height = frame.height.to_usize().unwrap_or(0);

    let setups: Vec<SetupTriangle<T>> = (0..mesh.face_count())
        .into_par_iter()
        .fold(Vec::new, |mut acc, f| {
            setup_face(frame, f as u32, mesh.face_positions(f), &mut acc);
            acc
        })
        .flatten()
        .collect();

    let tiles_x = width.div_ceil(TILE);
    let tiles_y = height.div_ceil(TILE);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (i, s) in setups.iter().enumerate() {
        let [x0, y0, x1, y1] = s.bbox;
        for ty in y0 / TILE..=y1 / TILE {
            for tx in x0 / TILE..=x1 / TILE {
                bins[ty * tiles_x + tx].push(i as u32);
            }
        }
    }

    let tiles: Vec<(Vec<T>, Vec<u32>)> = bins
        .par_iter()
        .enumerate()
        .map(|(t, bin)| {
            let (tx, ty) = (t % tiles_x, t / tiles_x);
            let rect = [
                tx * TILE,
                ty * TILE,
                ((tx + 1) * TILE).min(width) - 1,
                ((ty + 1) * TILE).min(height) - 1,
            ];
            raster_tile(frame, &setups, bin, rect)
        })
        .collect();

    let mut depth = Image::new(width, height, T::one());
    let mut face = Image::new(width, height, NO_FACE);
    for (t, (tile_depth, tile_face)) in tiles.into_iter().enumerate() {
        let (tx, ty) = (t % tiles_x, t / tiles_x);
        let x0 = tx * TILE;
        let tw = (TILE).min(width - x0);
        for (row, (dr, fr)) in tile_depth.chunks(tw).zip(tile_face.chunks(tw)).enumerate() {
            let y = ty * TILE + row;
            let at = y * width + x0;
            depth.pixels_mut()[at..at + tw].copy_from_slice(dr);
            face.pixels_mut()[at..at + tw].copy_from_slice(fr);
        }
    }
    VisibilityBuffer { depth, face }
}

fn raster_tile<T: Real>(
    frame: &CameraFrame<T>,
    setups: &[SetupTriangle<T>],
    bin: &[u32],
    rect: [usize; 4],
) -> (Vec<T>, Vec<u32>) {
    let tw = rect[2] - rect[0] + 1;
    let th = rect[3] - rect[1] + 1;
    let mut depth = vec![T::one(); tw * th];
    let mut face = vec![NO_FACE; tw * th];
    let range = frame.far - frame.near;
    for &i in bin {
        let s = &setups[i as usize];
        let x0 = s.bbox[0].max(rect[0]);
        let y0 = s.bbox[1].max(rect[1]);
        let x1 = s.bbox[2].min(rect[2]);
        let y1 = s.bbox[3].min(rect[3]);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        let [ax, bx, cx] = s.xs;
        let [ay, by, cy] = s.ys;
        // Edge k is opposite vertex k.
        let edges = [(bx, by, cx, cy), (cx, cy, ax, ay), (ax, ay, bx, by)];
        let bias = edges.map(|(px, py, qx, qy)| if is_top_left(px, py, qx, qy) { 0 } else { -1 });
        let step_x = edges.map(|(_, py, _, qy)| -(qy - py) * ONE);
        let step_y = edges.map(|(px, _, qx, _)| (qx - px) * ONE);
        let sx = x0 as i64 * ONE + HALF;
        let sy = y0 as i64 * ONE + HALF;
        let mut row = [0usize; 3].map(|_| 0i64);
        for k in 0..3 {
            let (px, py, qx, qy) = edges[k];
            row[k] = edge_fn(px, py, qx, qy, sx, sy) + bias[k];
        }
        let inv_area = T::one() / T::lit(s.area as f64);
        for y in y0..=y1 {
            let mut e = row;
            for x in x0..=x1 {
                if e[0] >= 0 && e[1] >= 0 && e[2] >= 0 {
                    let w0 = T::lit((e[0] - bias[0]) as f64) * inv_area;
                    let w1 = T::lit((e[1] - bias[1]) as f64) * inv_area;
                    let w2 = T::one() - w0 - w1;
                    let key = w0 * s.key[0] + w1 * s.key[1] + w2 * s.key[2];
                    let z = if frame.orthographic { key } else { T::one() / key };
                    let d = (z - frame.near) / range;
                    let at = (y - rect[1]) * tw + (x - rect[0]);
                    if d >= T::zero() && d < depth[at] {
                        depth[at] = d;
                        face[at] = s.face;
                    }
                }
                for k in 0..3 {
                    e[k] += step_x[k];
                }
            }
            for k in 0..3 {
                row[k] += step_y[k];
            }
        }
    }
    (depth, face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Camera, Projection, Viewport};

    fn ortho(size: u32) -> CameraFrame<f64> {
        Camera {
            position: Vec3::new(0.0, 0.0, 10.0),
            look_at: Vec3::zero(),
            up: Vec3::new(0.0, 1.0, 0.0),
            projection: Projection::Orthographic {
                half_height: size as f64 / 2.0,
            },
            viewport: Viewport::square(size),
            near: 1.0,
            far: 19.0,
        }
        .frame()
    }

    /// Two triangles sharing a diagonal: every pixel is covered exactly once
    /// thanks to the fill rule.
    #[test]
    fn shared_edge_pixels_are_covered_once() {
        let frame = ortho(16);
        // Pixel-aligned square [-5, 5]^2 in pixel units.
        let m = Mesh::new(
            vec![
                Vec3::new(-5.0, -5.0, 0.0),
                Vec3::new(5.0, -5.0, 0.0),
                Vec3::new(5.0, 5.0, 0.0),
                Vec3::new(-5.0, 5.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let vis = rasterize_visibility(&m, &frame);
        let covered = vis.face.pixels().iter().filter(|&&f| f != NO_FACE).count();
        assert_eq!(covered, 100);
        // Overlapping the halves must give the same union count per face.
        let a = vis.face.pixels().iter().filter(|&&f| f == 0).count();
        let b = vis.face.pixels().iter().filter(|&&f| f == 1).count();
        assert_eq!(a + b, 100);
    }

    #[test]
    fn near_clipping_keeps_visible_part() {
        let frame = ortho(16);
        // A triangle crossing the near plane (view z from -5 to 15).
        let m = Mesh::new(
            vec![
                Vec3::new(-6.0, -6.0, 15.0),
                Vec3::new(6.0, -6.0, -5.0),
                Vec3::new(0.0, 6.0, -5.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let vis = rasterize_visibility(&m, &frame);
        let covered = vis.face.pixels().iter().filter(|&&f| f != NO_FACE).count();
        assert!(covered > 0);
        assert!(vis.depth.pixels().iter().all(|&d| (0.0..=1.0).contains(&d)));
    }

    #[test]
    fn clip_near_splits_quad() {
        let mut out = Vec::new();
        let poly = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 2.0),
            Vec3::new(0.0, 1.0, 2.0),
        ];
        clip_near(&poly, 1.0, &mut out);
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|p| p.z >= 1.0));
    }
}
