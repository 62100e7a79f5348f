//! Pixel buffers shared by every stage of the synthesis chain.
//!
//! All math runs on `f64` samples in `[0, 1]`; quantization to 8 bits only
//! happens in [`io`] at file boundaries.

pub mod color;
pub mod filter;
pub mod io;

pub use color::{rgb_to_lab, rgb_to_yuv, yuv_to_rgb, LabGrid, LabPixel, YuvImage};
pub use io::{load_image, save_image};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("failed to decode {path}: {reason}")]
    DecodeError { path: String, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("expected {expected} channel(s), got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid image: {0}")]
    Invalid(String),
}

/// Row-major `H x W x C` image with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    /// Builds a plane from raw samples. Rejects empty dimensions, channel
    /// counts other than 1 or 3, a wrong buffer length, and samples outside
    /// `[0, 1]` (including NaN).
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        Self::check_shape(height, width, channels, data.len())?;
        if let Some(bad) = data.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(ImageError::Invalid(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Self { height, width, channels, data })
    }

    /// Like [`ImagePlane::new`] but clamps finite samples into `[0, 1]`.
    /// NaN is still rejected.
    pub fn from_clamped(height: usize, width: usize, channels: usize, mut data: Vec<f64>) -> Result<Self, ImageError> {
        Self::check_shape(height, width, channels, data.len())?;
        for s in data.iter_mut() {
            if s.is_nan() {
                return Err(ImageError::Invalid("NaN sample".into()));
            }
            *s = s.clamp(0.0, 1.0);
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self, ImageError> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds a plane whose sample at `(y, x, c)` is `f(y, x, c)`, clamped.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::from_clamped(height, width, channels, data)
    }

    fn check_shape(height: usize, width: usize, channels: usize, len: usize) -> Result<(), ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::Invalid(format!("empty image {height}x{width}")));
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::Invalid(format!("unsupported channel count {channels}")));
        }
        if len != height * width * channels {
            return Err(ImageError::DimensionMismatch(format!(
                "buffer of {len} samples for {height}x{width}x{channels}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(y, x, c)]
    }

    /// Sets a sample, clamping it into `[0, 1]`.
    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f64) {
        let i = self.index(y, x, c);
        self.data[i] = value.clamp(0.0, 1.0);
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f64] {
        let i = self.index(y, x, 0);
        &self.data[i..i + self.channels]
    }

    pub fn same_shape(&self, other: &ImagePlane) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn ensure_same_shape(&self, other: &ImagePlane) -> Result<(), ImageError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(ImageError::DimensionMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )))
        }
    }

    pub fn ensure_same_channels(&self, other: &ImagePlane) -> Result<(), ImageError> {
        if self.channels == other.channels {
            Ok(())
        } else {
            Err(ImageError::ChannelMismatch { expected: self.channels, actual: other.channels })
        }
    }

    pub fn ensure_channels(&self, expected: usize) -> Result<(), ImageError> {
        if self.channels == expected {
            Ok(())
        } else {
            Err(ImageError::ChannelMismatch { expected, actual: self.channels })
        }
    }

    /// Copies the `height x width` window whose top-left corner is `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<ImagePlane, ImageError> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(ImageError::DimensionMismatch(format!(
                "window ({top},{left},{height},{width}) outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for y in top..top + height {
            let start = self.index(y, left, 0);
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        Ok(ImagePlane { height, width, channels: self.channels, data })
    }

    /// Nearest-neighbour resize.
    pub fn resize_nearest(&self, height: usize, width: usize) -> Result<ImagePlane, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::Invalid(format!("empty resize target {height}x{width}")));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for y in 0..height {
            let sy = nearest_source(y, height, self.height);
            for x in 0..width {
                let sx = nearest_source(x, width, self.width);
                data.extend_from_slice(self.pixel(sy, sx));
            }
        }
        Ok(ImagePlane { height, width, channels: self.channels, data })
    }

    /// Extracts one channel as a single-channel plane.
    pub fn channel(&self, c: usize) -> ImagePlane {
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        ImagePlane { height: self.height, width: self.width, channels: 1, data }
    }

    /// Interleaves equally sized single-channel planes.
    pub fn stack(planes: &[&ImagePlane]) -> Result<ImagePlane, ImageError> {
        let first = planes.first().ok_or_else(|| ImageError::Invalid("no planes".into()))?;
        for p in planes {
            p.ensure_channels(1)?;
            if p.height != first.height || p.width != first.width {
                return Err(ImageError::DimensionMismatch("planes differ in size".into()));
            }
        }
        let n = first.pixel_count();
        let mut data = Vec::with_capacity(n * planes.len());
        for i in 0..n {
            data.extend(planes.iter().map(|p| p.data[i]));
        }
        ImagePlane::new(first.height, first.width, planes.len(), data)
    }

    /// Converts to 8-bit samples with round-to-nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&s| quantize(s)).collect()
    }

    pub fn from_u8(height: usize, width: usize, channels: usize, bytes: &[u8]) -> Result<ImagePlane, ImageError> {
        Self::new(height, width, channels, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }

    /// Rounds every sample through 8 bits, i.e. what a save/load cycle yields.
    pub fn quantized(&self) -> ImagePlane {
        let data = self.data.iter().map(|&s| f64::from(quantize(s)) / 255.0).collect();
        ImagePlane { height: self.height, width: self.width, channels: self.channels, data }
    }

    pub fn max_abs_diff(&self, other: &ImagePlane) -> Result<f64, ImageError> {
        self.ensure_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

#[inline]
fn quantize(s: f64) -> u8 {
    (s.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub(crate) fn nearest_source(dst: usize, dst_len: usize, src_len: usize) -> usize {
    (((dst as f64 + 0.5) * src_len as f64 / dst_len as f64) as usize).min(src_len - 1)
}
