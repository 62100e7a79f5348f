use serde::{Deserialize, Serialize};

use super::{SlicError, SuperpixelLabeling};
use crate::imagecore::{ImageError, ImagePlane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

/// One superpixel cut out of its source image: the pixels of its bounding
/// box plus a membership mask over that box.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelPatch {
    pub bbox: BoundingBox,
    /// Row-major, `bbox.height * bbox.width`.
    pub mask: Vec<bool>,
    pub pixels: ImagePlane,
    pub source_label: u32,
}

impl SuperpixelPatch {
    /// Builds a patch, checking that the mask matches the pixel window and is nonempty.
    pub fn new(bbox: BoundingBox, mask: Vec<bool>, pixels: ImagePlane, source_label: u32) -> Result<Self, ImageError> {
        if pixels.height() != bbox.height || pixels.width() != bbox.width || mask.len() != bbox.height * bbox.width {
            return Err(ImageError::DimensionMismatch("patch mask/pixels/bbox disagree".into()));
        }
        if !mask.iter().any(|&m| m) {
            return Err(ImageError::Invalid("patch mask is empty".into()));
        }
        Ok(Self { bbox, mask, pixels, source_label })
    }

    /// Whole-image patch with a full mask.
    pub fn full(pixels: ImagePlane) -> Self {
        let bbox = BoundingBox { top: 0, left: 0, height: pixels.height(), width: pixels.width() };
        Self { mask: vec![true; bbox.height * bbox.width], bbox, pixels, source_label: 0 }
    }

    /// Number of member pixels.
    pub fn area(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    #[inline]
    pub fn in_mask(&self, y: usize, x: usize) -> bool {
        self.mask[y * self.bbox.width + x]
    }
}

/// Cuts one patch per label, ordered by label index.
pub fn extract_patches(img: &ImagePlane, labeling: &SuperpixelLabeling) -> Result<Vec<SuperpixelPatch>, SlicError> {
    if img.height() != labeling.height || img.width() != labeling.width || labeling.labels.len() != img.pixel_count() {
        return Err(ImageError::DimensionMismatch(format!(
            "labeling {}x{} for image {}x{}",
            labeling.height,
            labeling.width,
            img.height(),
            img.width()
        ))
        .into());
    }
    let count = labeling.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    // (min_y, min_x, max_y, max_x)
    let mut boxes: Vec<Option<(usize, usize, usize, usize)>> = vec![None; count];
    for (i, &l) in labeling.labels.iter().enumerate() {
        let (y, x) = (i / img.width(), i % img.width());
        let b = boxes[l as usize].get_or_insert((y, x, y, x));
        b.0 = b.0.min(y);
        b.1 = b.1.min(x);
        b.2 = b.2.max(y);
        b.3 = b.3.max(x);
    }

    let mut patches = Vec::new();
    for (label, b) in boxes.into_iter().enumerate() {
        let Some((y0, x0, y1, x1)) = b else { continue };
        let bbox = BoundingBox { top: y0, left: x0, height: y1 - y0 + 1, width: x1 - x0 + 1 };
        let mut mask = Vec::with_capacity(bbox.height * bbox.width);
        for y in y0..=y1 {
            for x in x0..=x1 {
                mask.push(labeling.label(y, x) as usize == label);
            }
        }
        let pixels = img.crop(bbox.top, bbox.left, bbox.height, bbox.width)?;
        patches.push(SuperpixelPatch { bbox, mask, pixels, source_label: label as u32 });
    }
    Ok(patches)
}

/// Renders a label map with a fixed pseudo-random color per label.
pub fn render_labels(labeling: &SuperpixelLabeling) -> ImagePlane {
    let color = |l: u32| -> [f64; 3] {
        let mut h = (l as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        h ^= h >> 31;
        [(h & 0xff) as f64 / 255.0, ((h >> 8) & 0xff) as f64 / 255.0, ((h >> 16) & 0xff) as f64 / 255.0]
    };
    let data = labeling.labels.iter().flat_map(|&l| color(l)).collect();
    ImagePlane::new(labeling.height, labeling.width, 3, data).expect("palette values lie in [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeling(h: usize, w: usize, labels: Vec<u32>) -> SuperpixelLabeling {
        let n = labels.iter().max().map_or(0, |&m| m as usize + 1);
        SuperpixelLabeling {
            height: h,
            width: w,
            labels,
            centers: vec![Default::default(); n],
            residual: 0.0,
            grid_interval: 1.0,
            iterations: 0,
        }
    }

    #[test]
    fn single_label_is_whole_image() {
        let img = ImagePlane::filled(3, 5, 3, 0.2).unwrap();
        let p = extract_patches(&img, &labeling(3, 5, vec![0; 15])).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].bbox, BoundingBox { top: 0, left: 0, height: 3, width: 5 });
        assert!(p[0].mask.iter().all(|&m| m));
        assert_eq!(p[0].pixels, img);
    }

    #[test]
    fn half_split_boxes() {
        let img = ImagePlane::from_fn(4, 4, 3, |y, x, _| (y * 4 + x) as f64 / 15.0).unwrap();
        let labels = (0..16).map(|i| u32::from(i % 4 >= 2)).collect();
        let p = extract_patches(&img, &labeling(4, 4, labels)).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].bbox, BoundingBox { top: 0, left: 0, height: 4, width: 2 });
        assert_eq!(p[1].bbox, BoundingBox { top: 0, left: 2, height: 4, width: 2 });
        assert_eq!(p[1].pixels.get(0, 0, 0), img.get(0, 2, 0));
        assert_eq!(p[1].source_label, 1);
    }

    #[test]
    fn mismatched_dimensions() {
        let img = ImagePlane::filled(3, 3, 3, 0.2).unwrap();
        assert!(extract_patches(&img, &labeling(3, 4, vec![0; 12])).is_err());
    }

    #[test]
    fn patch_constructor_checks() {
        let px = ImagePlane::filled(2, 2, 3, 0.1).unwrap();
        let bbox = BoundingBox { top: 0, left: 0, height: 2, width: 2 };
        assert!(SuperpixelPatch::new(bbox, vec![false; 4], px.clone(), 0).is_err());
        assert!(SuperpixelPatch::new(bbox, vec![true; 3], px.clone(), 0).is_err());
        assert_eq!(SuperpixelPatch::new(bbox, vec![true, false, false, false], px, 0).unwrap().area(), 1);
    }
}
