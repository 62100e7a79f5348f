//! SLIC superpixels over CIELAB + position, and patch extraction.
//!
//! Each center only competes for pixels inside the `2S x 2S` window around
//! it, so one assignment pass touches every pixel a bounded number of times
//! regardless of `k`.

mod connectivity;
mod patches;

pub use connectivity::is_four_connected;
pub use patches::{extract_patches, render_labels, BoundingBox, SuperpixelPatch};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{rgb_to_lab, ImageError, ImagePlane, LabGrid, LabPixel};

/// Iteration stops once the summed 5-D center movement drops below this.
pub const RESIDUAL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SlicError {
    #[error("image has {pixels} pixels, fewer than the {k} requested superpixels")]
    ImageTooSmall { pixels: usize, k: usize },
    #[error("invalid SLIC parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlicParams {
    /// Target superpixel count.
    pub k: usize,
    /// Compactness `m`: larger values favour regular, grid-like regions.
    pub compactness: f64,
    pub max_iters: usize,
    /// Fragments smaller than `min_region_frac * S^2` are merged away.
    pub min_region_frac: f64,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self { k: 50, compactness: 10.0, max_iters: 10, min_region_frac: 0.25 }
    }
}

impl SlicParams {
    pub fn validate(&self) -> Result<(), SlicError> {
        if self.k < 1 {
            return Err(SlicError::InvalidParams("k must be >= 1".into()));
        }
        if !(self.compactness.is_finite() && self.compactness > 0.0) {
            return Err(SlicError::InvalidParams("compactness must be > 0".into()));
        }
        if self.max_iters < 1 {
            return Err(SlicError::InvalidParams("max_iters must be >= 1".into()));
        }
        if !(self.min_region_frac > 0.0 && self.min_region_frac < 1.0) {
            return Err(SlicError::InvalidParams("min_region_frac must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `[l, a, b, x, y]`: a pixel or a cluster center in the joint color/space domain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector5 {
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub y: f64,
}

impl FeatureVector5 {
    pub fn from_pixel(lab: &LabPixel, x: usize, y: usize) -> Self {
        Self { l: lab.l, a: lab.a, b: lab.b, x: x as f64, y: y as f64 }
    }

    #[inline]
    pub fn color_distance(&self, other: &Self) -> f64 {
        let (dl, da, db) = (self.l - other.l, self.a - other.a, self.b - other.b);
        (dl * dl + da * da + db * db).sqrt()
    }

    #[inline]
    pub fn spatial_distance(&self, other: &Self) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }

    /// Plain Euclidean distance in all five coordinates (center movement).
    pub fn euclidean(&self, other: &Self) -> f64 {
        let d = [self.l - other.l, self.a - other.a, self.b - other.b, self.x - other.x, self.y - other.y];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Normalized SLIC distance `sqrt((d_c / m)^2 + (d_s / S)^2)`.
#[inline]
pub fn slic_distance(center: &FeatureVector5, pixel: &FeatureVector5, compactness: f64, grid_interval: f64) -> f64 {
    let dc = center.color_distance(pixel) / compactness;
    let ds = center.spatial_distance(pixel) / grid_interval;
    (dc * dc + ds * ds).sqrt()
}

/// Whether pixel `(x, y)` lies in the `2S x 2S` search window of `center`.
#[inline]
pub fn window_covers(center: &FeatureVector5, x: usize, y: usize, grid_interval: f64) -> bool {
    (x as f64 - center.x).abs() <= grid_interval && (y as f64 - center.y).abs() <= grid_interval
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelLabeling {
    pub height: usize,
    pub width: usize,
    /// Row-major label per pixel, each in `0..centers.len()`.
    pub labels: Vec<u32>,
    pub centers: Vec<FeatureVector5>,
    /// Center movement of the last clustering update.
    pub residual: f64,
    pub grid_interval: f64,
    pub iterations: usize,
}

impl SuperpixelLabeling {
    #[inline]
    pub fn label(&self, y: usize, x: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn region_count(&self) -> usize {
        self.centers.len()
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centers.len()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Step-wise SLIC state. [`slic_segment`] drives it to completion; tests and
/// tooling can interleave their own checks between [`assign`](Self::assign)
/// and [`update`](Self::update).
#[derive(Debug, Clone)]
pub struct SlicSolver {
    lab: LabGrid,
    params: SlicParams,
    grid_interval: f64,
    centers: Vec<FeatureVector5>,
    labels: Vec<u32>,
    iterations: usize,
    residual: f64,
}

impl SlicSolver {
    pub fn new(img: &ImagePlane, params: &SlicParams) -> Result<Self, SlicError> {
        params.validate()?;
        let pixels = img.pixel_count();
        if pixels < params.k {
            return Err(SlicError::ImageTooSmall { pixels, k: params.k });
        }
        let lab = rgb_to_lab(img)?;
        let grid_interval = (pixels as f64 / params.k as f64).sqrt();
        let centers = seed_centers(&lab, params.k);
        Ok(Self {
            labels: vec![0; pixels],
            lab,
            params: *params,
            grid_interval,
            centers,
            iterations: 0,
            residual: f64::INFINITY,
        })
    }

    pub fn grid_interval(&self) -> f64 {
        self.grid_interval
    }

    pub fn params(&self) -> &SlicParams {
        &self.params
    }

    pub fn lab(&self) -> &LabGrid {
        &self.lab
    }

    pub fn centers(&self) -> &[FeatureVector5] {
        &self.centers
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn feature(&self, x: usize, y: usize) -> FeatureVector5 {
        FeatureVector5::from_pixel(self.lab.at(y, x), x, y)
    }

    /// Assigns every pixel to the closest center whose window covers it,
    /// lowest index winning ties. Pixels no window reaches fall back to the
    /// globally closest center.
    pub fn assign(&mut self) {
        let (h, w) = (self.lab.height, self.lab.width);
        let s = self.grid_interval;
        let m = self.params.compactness;
        let mut best = vec![f64::INFINITY; h * w];
        for (ci, c) in self.centers.iter().enumerate() {
            let y0 = (c.y - s).floor().max(0.0) as usize;
            let y1 = ((c.y + s).ceil().max(0.0) as usize).min(h - 1);
            let x0 = (c.x - s).floor().max(0.0) as usize;
            let x1 = ((c.x + s).ceil().max(0.0) as usize).min(w - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if !window_covers(c, x, y, s) {
                        continue;
                    }
                    let d = slic_distance(c, &self.feature(x, y), m, s);
                    let i = y * w + x;
                    if d < best[i] {
                        best[i] = d;
                        self.labels[i] = ci as u32;
                    }
                }
            }
        }
        for (i, _) in best.iter().enumerate().filter(|(_, d)| !d.is_finite()) {
            let p = self.feature(i % w, i / w);
            let mut nearest = (f64::INFINITY, 0u32);
            for (ci, c) in self.centers.iter().enumerate() {
                let d = slic_distance(c, &p, m, s);
                if d < nearest.0 {
                    nearest = (d, ci as u32);
                }
            }
            self.labels[i] = nearest.1;
        }
    }

    /// Moves each center to the mean of its members and returns the summed
    /// movement. Centers that lost all members stay put.
    pub fn update(&mut self) -> f64 {
        let means = cluster_means(&self.lab, &self.labels, self.centers.len());
        let mut residual = 0.0;
        for (center, mean) in self.centers.iter_mut().zip(means) {
            if let Some(mean) = mean {
                residual += center.euclidean(&mean);
                *center = mean;
            }
        }
        self.iterations += 1;
        self.residual = residual;
        residual
    }

    /// Alternates assignment and update until convergence or the iteration cap.
    pub fn run(&mut self) {
        while self.iterations < self.params.max_iters {
            self.assign();
            if self.update() < RESIDUAL_THRESHOLD {
                break;
            }
        }
    }

    /// Enforces 4-connectivity and recomputes centers on the final regions.
    pub fn finish(self) -> SuperpixelLabeling {
        let (h, w) = (self.lab.height, self.lab.width);
        let min_size = (self.params.min_region_frac * self.grid_interval * self.grid_interval).ceil() as usize;
        let (labels, count) = connectivity::enforce(&self.labels, h, w, min_size);
        let centers = cluster_means(&self.lab, &labels, count)
            .into_iter()
            .map(|m| m.expect("every relabeled region is nonempty"))
            .collect();
        SuperpixelLabeling {
            height: h,
            width: w,
            labels,
            centers,
            residual: self.residual,
            grid_interval: self.grid_interval,
            iterations: self.iterations,
        }
    }
}

/// Segments a 3-channel image into roughly `params.k` superpixels.
pub fn slic_segment(img: &ImagePlane, params: &SlicParams) -> Result<SuperpixelLabeling, SlicError> {
    let mut solver = SlicSolver::new(img, params)?;
    solver.run();
    Ok(solver.finish())
}

/// Mean feature vector per label; `None` for labels with no members.
pub fn cluster_means(lab: &LabGrid, labels: &[u32], count: usize) -> Vec<Option<FeatureVector5>> {
    let mut sums = vec![[0.0f64; 5]; count];
    let mut sizes = vec![0usize; count];
    for (i, &l) in labels.iter().enumerate() {
        let p = &lab.pixels[i];
        let s = &mut sums[l as usize];
        s[0] += p.l;
        s[1] += p.a;
        s[2] += p.b;
        s[3] += (i % lab.width) as f64;
        s[4] += (i / lab.width) as f64;
        sizes[l as usize] += 1;
    }
    sums.into_iter()
        .zip(sizes)
        .map(|(s, n)| {
            (n > 0).then(|| {
                let n = n as f64;
                FeatureVector5 { l: s[0] / n, a: s[1] / n, b: s[2] / n, x: s[3] / n, y: s[4] / n }
            })
        })
        .collect()
}

/// Lays out a near-square grid of about `k` centers and nudges each onto the
/// lowest-gradient pixel of its 3x3 neighbourhood.
fn seed_centers(lab: &LabGrid, k: usize) -> Vec<FeatureVector5> {
    let (h, w) = (lab.height, lab.width);
    let nx = ((k as f64 * w as f64 / h as f64).sqrt().ceil() as usize).clamp(1, w);
    let ny = ((k as f64 / nx as f64).round() as usize).clamp(1, h);
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let fx = (i as f64 + 0.5) * w as f64 / nx as f64 - 0.5;
            let fy = (j as f64 + 0.5) * h as f64 / ny as f64 - 0.5;
            let px = (fx.round().max(0.0) as usize).min(w - 1);
            let py = (fy.round().max(0.0) as usize).min(h - 1);

            let mut best = (gradient(lab, px, py), px, py);
            let base = best.0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (nx_, ny_) = (px as isize + dx, py as isize + dy);
                    if nx_ < 0 || ny_ < 0 || nx_ >= w as isize || ny_ >= h as isize {
                        continue;
                    }
                    let g = gradient(lab, nx_ as usize, ny_ as usize);
                    if g < best.0 {
                        best = (g, nx_ as usize, ny_ as usize);
                    }
                }
            }
            let center = if best.0 < base {
                FeatureVector5::from_pixel(lab.at(best.2, best.1), best.1, best.2)
            } else {
                let p = lab.at(py, px);
                FeatureVector5 { l: p.l, a: p.a, b: p.b, x: fx, y: fy }
            };
            centers.push(center);
        }
    }
    centers
}

fn gradient(lab: &LabGrid, x: usize, y: usize) -> f64 {
    let (h, w) = (lab.height, lab.width);
    let sq = |p: &LabPixel, q: &LabPixel| {
        let d = p.distance(q);
        d * d
    };
    let horiz = sq(lab.at(y, (x + 1).min(w - 1)), lab.at(y, x.saturating_sub(1)));
    let vert = sq(lab.at((y + 1).min(h - 1), x), lab.at(y.saturating_sub(1), x));
    horiz + vert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(l: f64, a: f64, b: f64, x: f64, y: f64) -> FeatureVector5 {
        FeatureVector5 { l, a, b, x, y }
    }

    #[test]
    fn distance_examples() {
        let c = fv(50.0, 0.0, 0.0, 10.0, 10.0);
        assert_eq!(slic_distance(&c, &c, 10.0, 5.0), 0.0);

        let (m, s) = (7.0, 3.0);
        let d = slic_distance(&fv(0.0, 0.0, 0.0, 0.0, 0.0), &fv(m, 0.0, 0.0, s, 0.0), m, s);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);

        // d_c = |(3,4,0)| = 5, d_s = |(3,4)| = 5.
        let d = slic_distance(&c, &fv(53.0, 4.0, 0.0, 13.0, 14.0), 10.0, 5.0);
        assert!((d - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((d - 1.11803).abs() < 1e-5);
    }

    #[test]
    fn params_validation() {
        assert!(SlicParams::default().validate().is_ok());
        let bad = [
            SlicParams { k: 0, ..Default::default() },
            SlicParams { compactness: 0.0, ..Default::default() },
            SlicParams { max_iters: 0, ..Default::default() },
            SlicParams { min_region_frac: 1.0, ..Default::default() },
            SlicParams { min_region_frac: 0.0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn too_small_image() {
        let img = ImagePlane::filled(3, 3, 3, 0.5).unwrap();
        let p = SlicParams { k: 10, ..Default::default() };
        assert!(matches!(slic_segment(&img, &p), Err(SlicError::ImageTooSmall { pixels: 9, k: 10 })));
    }

    #[test]
    fn solid_image_splits_into_even_quadrants() {
        let img = ImagePlane::filled(32, 32, 3, 0.4).unwrap();
        let lab = slic_segment(&img, &SlicParams { k: 4, ..Default::default() }).unwrap();
        assert_eq!(lab.region_count(), 4);
        for size in lab.region_sizes() {
            assert!((size as f64 - 256.0).abs() <= 0.2 * 256.0, "size {size}");
        }
        // Regions follow the spatial Voronoi cells of the 2x2 grid.
        assert_ne!(lab.label(0, 0), lab.label(0, 31));
        assert_ne!(lab.label(0, 0), lab.label(31, 0));
        assert_eq!(lab.label(3, 3), lab.label(12, 12));
    }

    #[test]
    fn two_color_halves_split_exactly() {
        let img = ImagePlane::from_fn(16, 16, 3, |_, x, c| match (x < 8, c) {
            (true, 0) | (false, 2) => 1.0,
            _ => 0.0,
        })
        .unwrap();
        let lab = slic_segment(&img, &SlicParams { k: 2, compactness: 10.0, ..Default::default() }).unwrap();
        assert_eq!(lab.region_count(), 2);
        let left = lab.label(0, 0);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(lab.label(y, x) == left, x < 8, "pixel ({y},{x})");
            }
        }
    }

    #[test]
    fn deterministic_and_centers_inside() {
        let img = ImagePlane::from_fn(40, 30, 3, |y, x, c| ((y * 7 + x * 13 + c * 5) % 17) as f64 / 16.0).unwrap();
        let p = SlicParams { k: 9, ..Default::default() };
        let a = slic_segment(&img, &p).unwrap();
        let b = slic_segment(&img, &p).unwrap();
        assert_eq!(a, b);
        for c in &a.centers {
            assert!(c.x >= 0.0 && c.x <= 29.0 && c.y >= 0.0 && c.y <= 39.0);
        }
        assert!(a.labels.iter().all(|&l| (l as usize) < a.centers.len()));
    }
}
