use super::MetricError;
use crate::imagecore::ImagePlane;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Window side actually used: 11, or the largest odd size that fits a smaller image.
pub fn window_size(height: usize, width: usize) -> usize {
    let fit = height.min(width).min(SSIM_WINDOW);
    if fit.is_multiple_of(2) {
        fit - 1
    } else {
        fit
    }
}

/// Normalized 1-D Gaussian taps.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let mut g: Vec<f64> = (0..size).map(|i| (-(i as f64 - r).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Separable Gaussian filter over the valid region only.
fn filter_valid(src: &[f64], h: usize, w: usize, taps: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = taps.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * src[y * w + x + k]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * rows[(y + k) * ow + x]).sum();
        }
    }
    (out, oh, ow)
}

/// Mean SSIM over every valid window position of every channel.
pub fn ssim(pred: &ImagePlane, gt: &ImagePlane) -> Result<f64, MetricError> {
    pred.ensure_same_shape(gt)?;
    let (h, w) = (pred.height(), pred.width());
    let taps = gaussian_taps(window_size(h, w), SSIM_SIGMA);
    let mut total = 0.0;
    let mut count = 0usize;
    for c in 0..pred.channels() {
        let x = pred.channel(c).into_data();
        let y = gt.channel(c).into_data();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
        let (mx, _, _) = filter_valid(&x, h, w, &taps);
        let (my, _, _) = filter_valid(&y, h, w, &taps);
        let (sxx, _, _) = filter_valid(&xx, h, w, &taps);
        let (syy, _, _) = filter_valid(&yy, h, w, &taps);
        let (sxy, _, _) = filter_valid(&xy, h, w, &taps);
        for i in 0..mx.len() {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            total += ((2.0 * ux * uy + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_shrinks_for_small_images() {
        assert_eq!(window_size(100, 40), 11);
        assert_eq!(window_size(8, 40), 7);
        assert_eq!(window_size(1, 1), 1);
        assert!((gaussian_taps(11, 1.5).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_images_score_one() {
        let img = ImagePlane::from_fn(16, 20, 3, |y, x, c| ((y * 3 + x * 5 + c) % 11) as f64 / 10.0).unwrap();
        assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_image_scores_low() {
        let img = ImagePlane::from_fn(16, 16, 1, |y, x, _| ((y * 3 + x * 5) % 11) as f64 / 10.0).unwrap();
        let inv = ImagePlane::from_fn(16, 16, 1, |y, x, _| 1.0 - img.get(y, x, 0)).unwrap();
        let s = ssim(&img, &inv).unwrap();
        assert!((-1.0..0.0).contains(&s), "{s}");
    }
}
