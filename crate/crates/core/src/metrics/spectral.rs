use rustfft::{num_complex::Complex, FftPlanner};

use super::MetricError;
use crate::imagecore::ImagePlane;

/// Magnitudes of the unnormalized 2-D DFT of one channel, row-major.
pub fn dft2_magnitude(img: &ImagePlane, channel: usize) -> Vec<f64> {
    let (h, w) = (img.height(), img.width());
    let mut buf: Vec<Complex<f64>> = img.channel(channel).data().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();

    let row_fft = planner.plan_fft_forward(w);
    for row in buf.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = buf[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            buf[y * w + x] = col[y];
        }
    }
    buf.iter().map(|z| z.norm()).collect()
}

/// Mean over frequency bins of `| |F(pred)| - |F(gt)| |`, averaged over channels.
pub fn fft_magnitude_loss(pred: &ImagePlane, gt: &ImagePlane) -> Result<f64, MetricError> {
    pred.ensure_same_shape(gt)?;
    let bins = pred.pixel_count() as f64;
    let mut total = 0.0;
    for c in 0..pred.channels() {
        let (a, b) = (dft2_magnitude(pred, c), dft2_magnitude(gt, c));
        total += a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / bins;
    }
    Ok(total / pred.channels() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_impulse() {
        let imp = ImagePlane::new(2, 2, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let zero = ImagePlane::filled(2, 2, 1, 0.0).unwrap();
        assert_eq!(dft2_magnitude(&imp, 0), vec![1.0; 4]);
        assert!((fft_magnitude_loss(&imp, &zero).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_direct_dft() {
        let img = ImagePlane::from_fn(5, 6, 1, |y, x, _| ((y * 7 + x * 3) % 5) as f64 / 4.0).unwrap();
        let fast = dft2_magnitude(&img, 0);
        for u in 0..5 {
            for v in 0..6 {
                let mut z = Complex::new(0.0, 0.0);
                for y in 0..5 {
                    for x in 0..6 {
                        let phase = -2.0 * std::f64::consts::PI * ((u * y) as f64 / 5.0 + (v * x) as f64 / 6.0);
                        z += Complex::from_polar(img.get(y, x, 0), phase);
                    }
                }
                assert!((z.norm() - fast[u * 6 + v]).abs() < 1e-9);
            }
        }
    }
}
