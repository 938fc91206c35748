//! Row-major pixel buffers and their PGM/PNG encoders.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum BufferError {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
}

/// A dense `width × height` grid of pixels, row-major, origin top-left.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

impl<P: Copy + Send + Sync> Image<P> {
    pub fn new(width: usize, height: usize, fill: P) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    /// Panics if `data.len() != width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<P>) -> Self {
        assert_eq!(data.len(), width * height, "pixel count does not match dims");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> P + Sync) -> Self {
        let data = (0..width * height)
            .into_par_iter()
            .map(|i| f(i % width, i / width))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    /// Sample with coordinates clamped to the image border.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> P {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    #[inline]
    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<P> {
        self.data
    }

    pub fn map<Q: Copy + Send + Sync>(&self, f: impl Fn(P) -> Q + Sync) -> Image<Q> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.par_iter().map(|&p| f(p)).collect(),
        }
    }

    /// Combine two equally sized images pixel by pixel.
    pub fn zip_map<Q, R>(
        &self,
        other: &Image<Q>,
        f: impl Fn(P, Q) -> R + Sync,
    ) -> Result<Image<R>, BufferError>
    where
        Q: Copy + Send + Sync,
        R: Copy + Send + Sync,
    {
        self.check_dims(other)?;
        Ok(Image {
            width: self.width,
            height: self.height,
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_dims<Q>(&self, other: &Image<Q>) -> Result<(), BufferError> {
        if self.width != other.width || self.height != other.height {
            return Err(BufferError::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }
}

/// Map a `[0,1]` value onto an 8-bit code, rounding to nearest.
#[inline]
pub fn quantize<T: Real>(v: T) -> u8 {
    let scaled = (v.clamp01() * T::lit(255.0)).round();
    scaled.to_u8().unwrap_or(0)
}

impl<T: Real> Image<T> {
    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Binary PGM (P5), 8 bits per sample.
    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_gray8());
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<(), BufferError> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.encode_pgm())?;
        Ok(())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, BufferError> {
        encode_png(self.width, self.height, png::ColorType::Grayscale, &self.to_gray8())
    }
}

/// Encode raw 8-bit samples as PNG. Encoder settings are fixed so identical
/// inputs always produce identical bytes.
pub fn encode_png(
    width: usize,
    height: usize,
    color: png::ColorType,
    samples: &[u8],
) -> Result<Vec<u8>, BufferError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        encoder.set_filter(png::Filter::Sub);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(samples)?;
    }
    Ok(out)
}
