use super::RainError;
use crate::imagecore::filter::Kernel2D;

/// `k x k` Gaussian normalized to unit sum.
pub fn gaussian_kernel(k: usize, sigma: f64) -> Result<Kernel2D, RainError> {
    if k.is_multiple_of(2) {
        return Err(RainError::EvenKernel(k));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(RainError::InvalidParams(format!("sigma {sigma} must be > 0")));
    }
    let r = (k / 2) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut w = Vec::with_capacity(k * k);
    for dy in -r..=r {
        for dx in -r..=r {
            w.push((-((dy * dy + dx * dx) as f64) / denom).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    Ok(Kernel2D::new(k, k, w))
}

/// Line kernel for a streak of `length` pixels at `theta_deg` from the
/// horizontal (counter-clockwise, image rows growing downward), thickened to
/// `width` pixels across its minor axis. Every support cell carries the same
/// weight and the weights sum to 1.
///
/// The line is stepped one pixel at a time along its dominant axis, so a
/// width-1 kernel has exactly `length` cells of weight `1 / length`.
pub fn motion_kernel(length: usize, theta_deg: f64, width: usize) -> Kernel2D {
    let length = length.max(1);
    let width = width.max(1);
    let theta = theta_deg.to_radians();
    let (cos, sin) = (theta.cos(), theta.sin());
    let x_major = cos.abs() >= sin.abs();

    let first = -(((length - 1) / 2) as isize);
    let thick_lo = -(((width - 1) / 2) as isize);
    let mut cells: Vec<(isize, isize)> = Vec::with_capacity(length * width);
    for t in 0..length as isize {
        let s = (first + t) as f64;
        // Direction in (column, row) coordinates is (cos, -sin).
        let (dx, dy) = if x_major {
            (first + t, (-s * sin / cos).round() as isize)
        } else {
            ((-s * cos / sin).round() as isize, first + t)
        };
        for k in 0..width as isize {
            let off = thick_lo + k;
            cells.push(if x_major { (dy + off, dx) } else { (dy, dx + off) });
        }
    }

    let half_h = cells.iter().map(|c| c.0.abs()).max().unwrap_or(0);
    let half_w = cells.iter().map(|c| c.1.abs()).max().unwrap_or(0);
    let (kh, kw) = ((2 * half_h + 1) as usize, (2 * half_w + 1) as usize);
    let mut weights = vec![0.0; kh * kw];
    let unit = 1.0 / cells.len() as f64;
    for (dy, dx) in cells {
        weights[(dy + half_h) as usize * kw + (dx + half_w) as usize] = unit;
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|v| *v /= sum);
    Kernel2D::new(kh, kw, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_3x3_matches_closed_form() {
        let k = gaussian_kernel(3, 1.0).unwrap();
        let e = (-0.5f64).exp();
        let norm = (1.0 + 2.0 * e).powi(2);
        assert!((k.at(1, 1) - 1.0 / norm).abs() < 1e-15);
        assert!((k.at(0, 0) - e * e / norm).abs() < 1e-15);
        assert!((k.at(0, 1) - e / norm).abs() < 1e-15);
        assert!((k.sum() - 1.0).abs() < 1e-12);
        assert!(matches!(gaussian_kernel(4, 1.0), Err(RainError::EvenKernel(4))));
        assert!(gaussian_kernel(3, 0.0).is_err());
    }

    #[test]
    fn axis_aligned_lines() {
        let h = motion_kernel(5, 0.0, 1);
        assert_eq!((h.height(), h.width()), (1, 5));
        assert!(h.weights().iter().all(|&w| (w - 0.2).abs() < 1e-15));

        let v = motion_kernel(3, 90.0, 1);
        assert_eq!((v.height(), v.width()), (3, 1));
        assert!(v.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn width_thickens_across_the_line() {
        let k = motion_kernel(9, 90.0, 3);
        assert_eq!((k.height(), k.width()), (9, 3));
        assert_eq!(k.support().len(), 27);
        let k = motion_kernel(4, 0.0, 2);
        assert_eq!(k.support().len(), 8);
        assert!((k.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steep_line_leans_with_angle() {
        // At 80 degrees the streak runs up and to the right: the top row
        // (negative dy) lies right of center.
        let k = motion_kernel(21, 80.0, 1);
        let support = k.support();
        let top = support.iter().min_by_key(|c| c.0).unwrap();
        assert!(top.1 > 0, "{top:?}");
        assert_eq!(support.len(), 21);
    }
}
