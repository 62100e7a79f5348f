use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FusionError;
use crate::imagecore::ImagePlane;

/// Top-left offset of the best window and its MSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub y: usize,
    pub x: usize,
    pub mse: f64,
}

/// Exhaustive sliding-window search minimizing the per-sample MSE between
/// `needle` and each stride-aligned window of `haystack`. Ties go to the
/// smallest `(y, x)`.
pub fn match_region(haystack: &ImagePlane, needle: &ImagePlane, stride: usize) -> Result<MatchResult, FusionError> {
    match_region_masked(haystack, needle, None, stride)
}

/// Like [`match_region`] but only pixels with `mask[y * w + x]` set
/// contribute; the MSE is normalized by the number of contributing samples.
pub fn match_region_masked(
    haystack: &ImagePlane,
    needle: &ImagePlane,
    mask: Option<&[bool]>,
    stride: usize,
) -> Result<MatchResult, FusionError> {
    let (hh, hw) = (haystack.height(), haystack.width());
    let (nh, nw) = (needle.height(), needle.width());
    if nh > hh || nw > hw {
        return Err(FusionError::NeedleLargerThanHaystack { needle_h: nh, needle_w: nw, hay_h: hh, hay_w: hw });
    }
    haystack.ensure_same_channels(needle)?;
    if stride == 0 {
        return Err(FusionError::InvalidParams("stride must be >= 1".into()));
    }
    if let Some(m) = mask {
        if m.len() != nh * nw {
            return Err(FusionError::InvalidParams(format!("mask of {} for {nh}x{nw} needle", m.len())));
        }
    }

    let ch = needle.channels();
    // (haystack offset relative to the window origin, needle sample)
    let mut terms: Vec<(usize, f64)> = Vec::new();
    for y in 0..nh {
        for x in 0..nw {
            if mask.is_some_and(|m| !m[y * nw + x]) {
                continue;
            }
            for c in 0..ch {
                terms.push(((y * hw + x) * ch + c, needle.get(y, x, c)));
            }
        }
    }
    if terms.is_empty() {
        return Err(FusionError::InvalidParams("mask selects no pixels".into()));
    }

    let hay = haystack.data();
    let rows: Vec<usize> = (0..=hh - nh).step_by(stride).collect();
    let row_best: Vec<(f64, usize, usize)> = rows
        .par_iter()
        .map(|&y| {
            let mut best = (f64::INFINITY, y, 0usize);
            for x in (0..=hw - nw).step_by(stride) {
                let base = (y * hw + x) * ch;
                let mut sum = 0.0;
                let mut pruned = false;
                for &(rel, v) in &terms {
                    let d = hay[base + rel] - v;
                    sum += d * d;
                    if sum > best.0 {
                        pruned = true;
                        break;
                    }
                }
                if !pruned && sum < best.0 {
                    best = (sum, y, x);
                }
            }
            best
        })
        .collect();

    // Rows arrive in ascending y; strict comparison keeps the earliest tie.
    let mut best = row_best[0];
    for &cand in &row_best[1..] {
        if cand.0 < best.0 {
            best = cand;
        }
    }
    Ok(MatchResult { y: best.1, x: best.2, mse: best.0 / terms.len() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(h: usize, w: usize) -> ImagePlane {
        ImagePlane::from_fn(h, w, 3, |y, x, c| (crate::rng::mix64(((y * 64 + x) * 3 + c) as u64) % 997) as f64 / 996.0)
            .unwrap()
    }

    #[test]
    fn exact_copy_is_found() {
        let hay = noise(20, 24);
        let needle = hay.crop(3, 5, 6, 4).unwrap();
        let m = match_region(&hay, &needle, 1).unwrap();
        assert_eq!((m.y, m.x), (3, 5));
        assert_eq!(m.mse, 0.0);
    }

    #[test]
    fn constant_inputs_tie_at_origin() {
        let hay = ImagePlane::filled(10, 10, 3, 0.3).unwrap();
        let needle = ImagePlane::filled(3, 3, 3, 0.3).unwrap();
        let m = match_region(&hay, &needle, 1).unwrap();
        assert_eq!((m.y, m.x, m.mse), (0, 0, 0.0));
    }

    #[test]
    fn stride_restricts_offsets() {
        let hay = noise(20, 24);
        let needle = hay.crop(3, 5, 4, 4).unwrap();
        let m = match_region(&hay, &needle, 2).unwrap();
        assert_eq!(m.y % 2, 0);
        assert_eq!(m.x % 2, 0);
        assert!(m.mse > 0.0);
    }

    #[test]
    fn masked_pixels_are_ignored() {
        let hay = noise(12, 12);
        let mut needle = hay.crop(4, 2, 3, 3).unwrap();
        needle.set(1, 1, 0, 1.0 - needle.get(1, 1, 0));
        let mut mask = vec![true; 9];
        mask[4] = false;
        let m = match_region_masked(&hay, &needle, Some(&mask), 1).unwrap();
        assert_eq!((m.y, m.x, m.mse), (4, 2, 0.0));
    }

    #[test]
    fn oversized_needle() {
        let hay = noise(5, 5);
        let needle = noise(6, 2);
        assert!(matches!(match_region(&hay, &needle, 1), Err(FusionError::NeedleLargerThanHaystack { .. })));
    }
}
