//! Blending source superpixels into a target image at the location where
//! they fit best.
//!
//! The forward path slides a patch over the target, takes the window with
//! the lowest mask-weighted MSE and mixes `target * alpha + patch * (1 - alpha)`
//! at pixels selected by both the superpixel mask and a random keep-mask.
//! Patches that fail the size condition go through the fallback path, which
//! rescales them to a window that does satisfy it and writes the blended
//! window back into the target.

mod mask;
mod matching;

pub use mask::{make_random_mask, RandomMask};
pub use matching::{match_region, match_region_masked, MatchResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{nearest_source, ImageError, ImagePlane};
use crate::supgen::{BoundingBox, SuperpixelPatch};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("needle {needle_h}x{needle_w} larger than haystack {hay_h}x{hay_w}")]
    NeedleLargerThanHaystack { needle_h: usize, needle_w: usize, hay_h: usize, hay_w: usize },
    #[error("fusion condition failed: {0}")]
    FusionConditionFailed(String),
    #[error("patch lost all member pixels when resized to {0}x{1}")]
    EmptyPatch(usize, usize),
    #[error("invalid fusion parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionParams {
    /// Weight kept by the target inside the blended pixels.
    pub alpha: f64,
    /// Probability that a patch pixel is sampled into the random mask.
    pub mask_keep_frac: f64,
    /// Patches covering less than this fraction of the target go through the fallback.
    pub min_patch_frac: f64,
    /// Sliding-window step in pixels.
    pub stride: usize,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { alpha: 0.2, mask_keep_frac: 0.5, min_patch_frac: 0.01, stride: 1 }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<(), FusionError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(FusionError::InvalidParams(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.mask_keep_frac > 0.0 && self.mask_keep_frac <= 1.0) {
            return Err(FusionError::InvalidParams(format!("mask_keep_frac {} outside (0, 1]", self.mask_keep_frac)));
        }
        if !(self.min_patch_frac >= 0.0 && self.min_patch_frac <= 1.0) {
            return Err(FusionError::InvalidParams(format!("min_patch_frac {} outside [0, 1]", self.min_patch_frac)));
        }
        if self.stride < 1 {
            return Err(FusionError::InvalidParams("stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionPath {
    Forward,
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    pub image: ImagePlane,
    /// Target window that was blended.
    pub window: BoundingBox,
    pub mse: f64,
    pub path: FusionPath,
}

/// Checks the size gate for the forward path.
pub fn fusion_condition(
    target: &ImagePlane,
    patch: &SuperpixelPatch,
    params: &FusionParams,
) -> Result<(), FusionError> {
    let (ph, pw) = (patch.pixels.height(), patch.pixels.width());
    if ph > target.height() || pw > target.width() {
        return Err(FusionError::FusionConditionFailed(format!(
            "patch {ph}x{pw} exceeds target {}x{}",
            target.height(),
            target.width()
        )));
    }
    let min_area = params.min_patch_frac * target.pixel_count() as f64;
    if (patch.area() as f64) < min_area {
        return Err(FusionError::FusionConditionFailed(format!("patch area {} below {min_area:.1}", patch.area())));
    }
    Ok(())
}

/// Forward fusion at the patch's native size.
pub fn fuse_forward(
    target: &ImagePlane,
    patch: &SuperpixelPatch,
    params: &FusionParams,
    seed: u64,
) -> Result<FusionResult, FusionError> {
    params.validate()?;
    target.ensure_same_channels(&patch.pixels)?;
    fusion_condition(target, patch, params)?;

    let found = match_region_masked(target, &patch.pixels, Some(&patch.mask), params.stride)?;
    let (h, w) = (patch.pixels.height(), patch.pixels.width());
    let keep = make_random_mask(h, w, params.mask_keep_frac, seed);
    let alpha = params.alpha;

    let mut out = target.clone();
    for dy in 0..h {
        for dx in 0..w {
            if !(patch.in_mask(dy, dx) && keep.get(dy, dx)) {
                continue;
            }
            let (ty, tx) = (found.y + dy, found.x + dx);
            for c in 0..out.channels() {
                let blended = target.get(ty, tx, c) * alpha + patch.pixels.get(dy, dx, c) * (1.0 - alpha);
                out.set(ty, tx, c, blended);
            }
        }
    }
    Ok(FusionResult {
        image: out,
        window: BoundingBox { top: found.y, left: found.x, height: h, width: w },
        mse: found.mse,
        path: FusionPath::Forward,
    })
}

/// Window size the fallback path rescales a patch to: large enough to meet
/// the area gate, small enough to fit the target, aspect ratio preserved.
pub fn fallback_window(target: &ImagePlane, patch: &SuperpixelPatch, params: &FusionParams) -> (usize, usize) {
    let (th, tw) = (target.height() as f64, target.width() as f64);
    let (ph, pw) = (patch.pixels.height() as f64, patch.pixels.width() as f64);
    let area = patch.area() as f64;
    let min_area = params.min_patch_frac * th * tw;
    let grow = if area < min_area { (min_area / area).sqrt() } else { 1.0 };
    let (h, w) = (ph * grow, pw * grow);
    let shrink = (th / h).min(tw / w).min(1.0);
    let h = ((h * shrink).round() as usize).clamp(1, target.height());
    let w = ((w * shrink).round() as usize).clamp(1, target.width());
    (h, w)
}

/// Replacement transfer: rescale the patch, find the best-matching target
/// window `P`, blend `P * alpha + patch * (1 - alpha)` inside it and write
/// the result back as `target - P + P_fused`.
pub fn fuse_fallback(
    target: &ImagePlane,
    patch: &SuperpixelPatch,
    params: &FusionParams,
    seed: u64,
) -> Result<FusionResult, FusionError> {
    params.validate()?;
    target.ensure_same_channels(&patch.pixels)?;
    let (h, w) = fallback_window(target, patch, params);
    let (pixels, mask) = if (h, w) == (patch.pixels.height(), patch.pixels.width()) {
        (patch.pixels.clone(), patch.mask.clone())
    } else {
        (
            patch.pixels.resize_nearest(h, w)?,
            resize_mask(&patch.mask, patch.pixels.height(), patch.pixels.width(), h, w),
        )
    };
    if !mask.iter().any(|&m| m) {
        return Err(FusionError::EmptyPatch(h, w));
    }

    let found = match_region_masked(target, &pixels, Some(&mask), params.stride)?;
    let matched = target.crop(found.y, found.x, h, w)?;
    let keep = make_random_mask(h, w, params.mask_keep_frac, seed);
    let alpha = params.alpha;

    let mut out = target.clone();
    for dy in 0..h {
        for dx in 0..w {
            let selected = mask[dy * w + dx] && keep.get(dy, dx);
            let (ty, tx) = (found.y + dy, found.x + dx);
            for c in 0..out.channels() {
                let p = matched.get(dy, dx, c);
                let fused = if selected { p * alpha + pixels.get(dy, dx, c) * (1.0 - alpha) } else { p };
                out.set(ty, tx, c, target.get(ty, tx, c) - p + fused);
            }
        }
    }
    Ok(FusionResult {
        image: out,
        window: BoundingBox { top: found.y, left: found.x, height: h, width: w },
        mse: found.mse,
        path: FusionPath::Fallback,
    })
}

/// Forward fusion, switching to the fallback when the size gate fails.
pub fn fuse_patch(
    target: &ImagePlane,
    patch: &SuperpixelPatch,
    params: &FusionParams,
    seed: u64,
) -> Result<FusionResult, FusionError> {
    match fuse_forward(target, patch, params, seed) {
        Err(FusionError::FusionConditionFailed(_)) => fuse_fallback(target, patch, params, seed),
        other => other,
    }
}

fn resize_mask(mask: &[bool], h: usize, w: usize, nh: usize, nw: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(nh * nw);
    for y in 0..nh {
        let sy = nearest_source(y, nh, h);
        for x in 0..nw {
            out.push(mask[sy * w + nearest_source(x, nw, w)]);
        }
    }
    out
}
