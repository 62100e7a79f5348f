//! Training losses and full-reference quality scores.
//!
//! All losses are per-image means over every sample (and, for the spectral
//! loss, over every frequency bin of every channel).

mod spectral;
mod ssim;

pub use spectral::{dft2_magnitude, fft_magnitude_loss};
pub use ssim::{ssim, SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::filter::reflect_index;
use crate::imagecore::{ImageError, ImagePlane};

pub const PSNR_CAP_DB: f64 = 99.0;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid loss parameters: {0}")]
    InvalidParams(String),
}

impl From<ImageError> for MetricError {
    fn from(e: ImageError) -> Self {
        MetricError::DimensionMismatch(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Charbonnier smoothing constant.
    pub epsilon: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0, epsilon: 1e-3 }
    }
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        Self { lambda1, lambda2, lambda3, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(1e-6..=1e-3).contains(&self.epsilon) {
            return Err(MetricError::InvalidParams(format!("epsilon {} outside [1e-6, 1e-3]", self.epsilon)));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(MetricError::InvalidParams(format!("{name} = {v} must be a finite non-negative weight")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub charbonnier: f64,
    pub fft_loss: f64,
    pub edge_loss: f64,
    pub total: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Mean of `sqrt((pred - gt)^2 + eps^2)`.
pub fn charbonnier(pred: &ImagePlane, gt: &ImagePlane, epsilon: f64) -> Result<f64, MetricError> {
    pred.ensure_same_shape(gt)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(MetricError::InvalidParams(format!("epsilon {epsilon} must be > 0")));
    }
    let eps2 = epsilon * epsilon;
    let sum: f64 = pred.data().iter().zip(gt.data()).map(|(p, g)| ((p - g) * (p - g) + eps2).sqrt()).sum();
    Ok(sum / pred.data().len() as f64)
}

/// Per-channel Sobel gradient magnitude with mirrored borders, same layout
/// as the input. Written as differences of opposite taps so flat regions
/// give exactly zero.
pub fn sobel_magnitude(img: &ImagePlane) -> Vec<f64> {
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let mut out = vec![0.0; img.data().len()];
    for y in 0..h {
        let ys = [reflect_index(y as isize - 1, h), y, reflect_index(y as isize + 1, h)];
        for x in 0..w {
            let xs = [reflect_index(x as isize - 1, w), x, reflect_index(x as isize + 1, w)];
            for c in 0..ch {
                let at = |r: usize, q: usize| img.get(ys[r], xs[q], c);
                let gx = (at(0, 2) - at(0, 0)) + 2.0 * (at(1, 2) - at(1, 0)) + (at(2, 2) - at(2, 0));
                let gy = (at(2, 0) - at(0, 0)) + 2.0 * (at(2, 1) - at(0, 1)) + (at(2, 2) - at(0, 2));
                out[(y * w + x) * ch + c] = (gx * gx + gy * gy).sqrt();
            }
        }
    }
    out
}

/// Mean absolute difference of Sobel gradient magnitudes.
pub fn edge_loss(pred: &ImagePlane, gt: &ImagePlane) -> Result<f64, MetricError> {
    pred.ensure_same_shape(gt)?;
    let (ep, eg) = (sobel_magnitude(pred), sobel_magnitude(gt));
    Ok(ep.iter().zip(&eg).map(|(a, b)| (a - b).abs()).sum::<f64>() / ep.len() as f64)
}

pub fn mse(pred: &ImagePlane, gt: &ImagePlane) -> Result<f64, MetricError> {
    pred.ensure_same_shape(gt)?;
    let sum: f64 = pred.data().iter().zip(gt.data()).map(|(p, g)| (p - g) * (p - g)).sum();
    Ok(sum / pred.data().len() as f64)
}

/// Peak signal-to-noise ratio for unit peak, capped at [`PSNR_CAP_DB`].
pub fn psnr(pred: &ImagePlane, gt: &ImagePlane) -> Result<f64, MetricError> {
    let m = mse(pred, gt)?;
    if m < 1e-10 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / m).log10()).min(PSNR_CAP_DB))
}

/// Weighted sum of the three losses, plus PSNR and SSIM.
pub fn total_loss(pred: &ImagePlane, gt: &ImagePlane, weights: &LossWeights) -> Result<ScoreReport, MetricError> {
    weights.validate()?;
    let charbonnier = charbonnier(pred, gt, weights.epsilon)?;
    let fft_loss = fft_magnitude_loss(pred, gt)?;
    let edge_loss = edge_loss(pred, gt)?;
    Ok(ScoreReport {
        charbonnier,
        fft_loss,
        edge_loss,
        total: weights.lambda1 * charbonnier + weights.lambda2 * fft_loss + weights.lambda3 * edge_loss,
        psnr_db: psnr(pred, gt)?,
        ssim: ssim(pred, gt)?,
    })
}
