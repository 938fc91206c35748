//! One-pixel line stepping shared by the id pass, hidden-line sampling and
//! stroke drawing, so a point on a segment maps to exactly the pixel the
//! stepper would draw for it.

use crate::geometry::{CameraFrame, ScreenPoint, Vec3};
use crate::scalar::Real;

/// A 3D segment after near-plane clipping and projection. `t0`/`t1` are the
/// parameters of the clipped ends on the original segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenSegment<T> {
    pub a: ScreenPoint<T>,
    pub b: ScreenPoint<T>,
    pub t0: T,
    pub t1: T,
}

/// Clip `p → q` against the near plane and project it. `None` when the
/// whole segment lies in front of the near plane.
pub fn project_segment<T: Real>(
    frame: &CameraFrame<T>,
    p: Vec3<T>,
    q: Vec3<T>,
) -> Option<ScreenSegment<T>> {
    let (vp, vq) = (frame.to_view(p), frame.to_view(q));
    let near = frame.near;
    let (mut t0, mut t1) = (T::zero(), T::one());
    match (vp.z >= near, vq.z >= near) {
        (true, true) => {}
        (false, false) => return None,
        (false, true) => t0 = (near - vp.z) / (vq.z - vp.z),
        (true, false) => t1 = (near - vp.z) / (vq.z - vp.z),
    }
    let at = |t: T| {
        let mut v = vp.lerp(vq, t);
        v.z = v.z.max(near);
        frame.view_to_screen(v)
    };
    Some(ScreenSegment {
        a: at(t0),
        b: at(t1),
        t0,
        t1,
    })
}

/// Steps one pixel per unit along the segment's major axis; the minor
/// coordinate is the line's value at the pixel-centre major coordinate.
#[derive(Debug, Clone, Copy)]
pub struct LineStepper<T> {
    x_major: bool,
    start: [T; 2],
    delta: [T; 2],
    lo: T,
    hi: T,
    z: [T; 2],
    orthographic: bool,
}

impl<T: Real> LineStepper<T> {
    pub fn new(seg: &ScreenSegment<T>, orthographic: bool) -> Self {
        let (dx, dy) = (seg.b.x - seg.a.x, seg.b.y - seg.a.y);
        let x_major = dx.abs() >= dy.abs();
        let (start, delta) = if x_major {
            ([seg.a.x, seg.a.y], [dx, dy])
        } else {
            ([seg.a.y, seg.a.x], [dy, dx])
        };
        let end = start[0] + delta[0];
        Self {
            x_major,
            start,
            delta,
            lo: start[0].min(end),
            hi: start[0].max(end),
            z: [seg.a.z, seg.b.z],
            orthographic,
        }
    }

    /// Screen-space parameter in `[0, 1]` at a major-axis coordinate.
    #[inline]
    fn param(&self, major: T) -> T {
        if self.delta[0] == T::zero() {
            T::zero()
        } else {
            ((major - self.start[0]) / self.delta[0]).clamp01()
        }
    }

    #[inline]
    fn pixel_at_major(&self, m: i64) -> (i64, i64, T) {
        let c = (T::lit(m as f64) + T::lit(0.5)).max(self.lo).min(self.hi);
        let s = self.param(c);
        let minor = (self.start[1] + self.delta[1] * s).floor().to_i64().unwrap_or(i64::MIN);
        if self.x_major {
            (m, minor, s)
        } else {
            (minor, m, s)
        }
    }

    fn major_range(&self) -> (i64, i64) {
        let a = self.lo.floor().to_i64().unwrap_or(0);
        let b = self.hi.floor().to_i64().unwrap_or(0);
        (a, b)
    }

    /// View depth at screen parameter `s` (exact under perspective).
    #[inline]
    pub fn view_depth(&self, s: T) -> T {
        if self.orthographic {
            self.z[0] + (self.z[1] - self.z[0]) * s
        } else {
            let q = T::one() / self.z[0] + (T::one() / self.z[1] - T::one() / self.z[0]) * s;
            T::one() / q
        }
    }

    /// Visit every stepped pixel as `(x, y, view_depth)`. Pixels outside
    /// `width × height` are skipped.
    pub fn for_each(&self, width: usize, height: usize, mut f: impl FnMut(usize, usize, T)) {
        let (m0, m1) = self.major_range();
        let limit = if self.x_major { width } else { height } as i64;
        for m in m0.max(0)..=m1.min(limit - 1) {
            let (x, y, s) = self.pixel_at_major(m);
            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                f(x as usize, y as usize, self.view_depth(s));
            }
        }
    }

    /// The stepped pixel that represents a screen point lying on the segment.
    pub fn pixel_for(&self, p: ScreenPoint<T>) -> (i64, i64) {
        let major = if self.x_major { p.x } else { p.y };
        let (m0, m1) = self.major_range();
        let m = major.floor().to_i64().unwrap_or(m0).clamp(m0, m1);
        let (x, y, _) = self.pixel_at_major(m);
        (x, y)
    }

    /// Number of pixels along the major axis.
    pub fn len_px(&self) -> T {
        self.hi - self.lo
    }
}
