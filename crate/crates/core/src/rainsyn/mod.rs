//! Pseudo-rain: salt noise, Gaussian blur and motion blur build a streak
//! mask that is mixed into the luminance channel as
//! `Y' = (1 - beta) * X + beta * Y`.
//!
//! The luminance mix scales rain-free pixels by `beta` as well; that
//! darkening is kept as is.

mod kernels;

pub use kernels::{gaussian_kernel, motion_kernel};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::filter::{convolve, Border, Kernel2D};
use crate::imagecore::{rgb_to_yuv, yuv_to_rgb, ImageError, ImagePlane, YuvImage};
use crate::rng::rng_from_seed;

#[derive(Debug, Error)]
pub enum RainError {
    #[error("Gaussian kernel size must be odd, got {0}")]
    EvenKernel(usize),
    #[error("invalid rain parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Synthesis knobs. Ranges are inclusive `[min, max]` and are sampled once per image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RainParams {
    /// Salt density `p`.
    pub density: [f64; 2],
    pub gauss_kernel: usize,
    pub gauss_sigma: f64,
    /// Streak length in pixels.
    pub length: [usize; 2],
    /// Streak angle in degrees from the horizontal.
    pub angle: [f64; 2],
    /// Streak width in pixels.
    pub width: [usize; 2],
    /// Luminance fusion coefficient.
    pub beta: [f64; 2],
}

impl Default for RainParams {
    fn default() -> Self {
        Self {
            density: [0.01, 0.05],
            gauss_kernel: 3,
            gauss_sigma: 1.0,
            length: [15, 45],
            angle: [70.0, 110.0],
            width: [1, 3],
            beta: [0.85, 0.95],
        }
    }
}

impl RainParams {
    pub fn validate(&self) -> Result<(), RainError> {
        let bad = |m: String| Err(RainError::InvalidParams(m));
        if self.gauss_kernel.is_multiple_of(2) {
            return Err(RainError::EvenKernel(self.gauss_kernel));
        }
        if !(self.gauss_sigma.is_finite() && self.gauss_sigma > 0.0) {
            return bad(format!("gauss_sigma {} must be > 0", self.gauss_sigma));
        }
        let [p0, p1] = self.density;
        if !(p0 > 0.0 && p0 <= p1 && p1 <= 1.0) {
            return bad(format!("density range {:?} must satisfy 0 < min <= max <= 1", self.density));
        }
        let [l0, l1] = self.length;
        if !(l0 >= 1 && l0 <= l1) {
            return bad(format!("length range {:?} must satisfy 1 <= min <= max", self.length));
        }
        let [w0, w1] = self.width;
        if !(w0 >= 1 && w0 <= w1) {
            return bad(format!("width range {:?} must satisfy 1 <= min <= max", self.width));
        }
        let [a0, a1] = self.angle;
        if !(a0.is_finite() && a1.is_finite() && a0 <= a1) {
            return bad(format!("angle range {:?} is empty", self.angle));
        }
        let [b0, b1] = self.beta;
        if !(b0 >= 0.0 && b0 <= b1 && b1 <= 1.0) {
            return bad(format!("beta range {:?} must satisfy 0 <= min <= max <= 1", self.beta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreakStage {
    Salt,
    Gauss,
    Motion,
}

/// Single-channel streak field tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StreakMask {
    pub stage: StreakStage,
    pub plane: ImagePlane,
}

/// Concrete values drawn for one image; enough to re-render it exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawnRain {
    pub density: f64,
    pub gauss_kernel: usize,
    pub gauss_sigma: f64,
    pub length: usize,
    pub angle: f64,
    pub width: usize,
    pub beta: f64,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RainSample {
    pub rainy: ImagePlane,
    pub mask: StreakMask,
    pub drawn: DrawnRain,
}

/// Zero mask with each pixel independently set to 1 with probability `p`.
pub fn salt_noise(height: usize, width: usize, p: f64, seed: u64) -> Result<StreakMask, RainError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(RainError::InvalidParams(format!("density {p} outside (0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let data = (0..height * width).map(|_| if rng.gen_bool(p) { 1.0 } else { 0.0 }).collect();
    Ok(StreakMask { stage: StreakStage::Salt, plane: ImagePlane::new(height, width, 1, data)? })
}

/// Gaussian blur with mirrored borders.
pub fn gaussian_blur(mask: &StreakMask, k: usize, sigma: f64) -> Result<StreakMask, RainError> {
    let kernel = gaussian_kernel(k, sigma)?;
    let p = &mask.plane;
    let out = convolve(p.data(), p.height(), p.width(), &kernel, Border::Reflect);
    Ok(StreakMask { stage: StreakStage::Gauss, plane: ImagePlane::from_clamped(p.height(), p.width(), 1, out)? })
}

/// Convolution with a line kernel, zero outside the image, clamped to `[0, 1]`.
pub fn motion_blur(mask: &StreakMask, kernel: &Kernel2D) -> Result<StreakMask, RainError> {
    let p = &mask.plane;
    let out = convolve(p.data(), p.height(), p.width(), kernel, Border::Zero);
    Ok(StreakMask { stage: StreakStage::Motion, plane: ImagePlane::from_clamped(p.height(), p.width(), 1, out)? })
}

/// `(1 - beta) * streak + beta * luma`, before clamping.
#[inline]
pub fn fuse_luminance(luma: f64, streak: f64, beta: f64) -> f64 {
    (1.0 - beta) * streak + beta * luma
}

/// Luminance plane after mixing in the streak mask.
pub fn rainy_luminance(yuv: &YuvImage, mask: &StreakMask, beta: f64) -> Result<ImagePlane, RainError> {
    yuv.y.ensure_same_shape(&mask.plane)?;
    let data = yuv.y.data().iter().zip(mask.plane.data()).map(|(&y, &x)| fuse_luminance(y, x, beta)).collect();
    Ok(ImagePlane::from_clamped(yuv.y.height(), yuv.y.width(), 1, data)?)
}

/// Mixes the streak mask into the Y channel of `clean` and converts back,
/// keeping the original chroma.
pub fn composite_rain(clean: &ImagePlane, mask: &StreakMask, beta: f64) -> Result<ImagePlane, RainError> {
    clean.ensure_channels(3)?;
    if clean.height() != mask.plane.height() || clean.width() != mask.plane.width() {
        return Err(ImageError::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.plane.height(),
            mask.plane.width(),
            clean.height(),
            clean.width()
        ))
        .into());
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(RainError::InvalidParams(format!("beta {beta} outside [0, 1]")));
    }
    let yuv = rgb_to_yuv(clean)?;
    let y = rainy_luminance(&yuv, mask, beta)?;
    Ok(yuv_to_rgb(&YuvImage { y, ..yuv })?)
}

fn draw_f64<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn draw_usize<R: Rng>(rng: &mut R, [lo, hi]: [usize; 2]) -> usize {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Samples one concrete parameter set. Draw order is fixed:
/// density, length, angle, width, beta, noise seed.
pub fn draw_rain(params: &RainParams, seed: u64) -> Result<DrawnRain, RainError> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let density = draw_f64(&mut rng, params.density);
    let length = draw_usize(&mut rng, params.length);
    let angle = draw_f64(&mut rng, params.angle);
    let width = draw_usize(&mut rng, params.width);
    let beta = draw_f64(&mut rng, params.beta);
    let noise_seed = rng.gen::<u64>();
    Ok(DrawnRain {
        density,
        gauss_kernel: params.gauss_kernel,
        gauss_sigma: params.gauss_sigma,
        length,
        angle,
        width,
        beta,
        noise_seed,
    })
}

/// Runs the three mask stages and the luminance mix for fixed parameters.
pub fn render_rain(clean: &ImagePlane, drawn: &DrawnRain) -> Result<RainSample, RainError> {
    clean.ensure_channels(3)?;
    let salt = salt_noise(clean.height(), clean.width(), drawn.density, drawn.noise_seed)?;
    let soft = gaussian_blur(&salt, drawn.gauss_kernel, drawn.gauss_sigma)?;
    let streaks = motion_blur(&soft, &motion_kernel(drawn.length, drawn.angle, drawn.width))?;
    let rainy = composite_rain(clean, &streaks, drawn.beta)?;
    Ok(RainSample { rainy, mask: streaks, drawn: *drawn })
}

/// Draws parameters under `seed` and renders rain onto `clean`.
pub fn synthesize_rain(clean: &ImagePlane, params: &RainParams, seed: u64) -> Result<RainSample, RainError> {
    let drawn = draw_rain(params, seed)?;
    render_rain(clean, &drawn)
}
