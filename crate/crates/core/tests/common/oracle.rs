use pseudorain::supgen::{FeatureVector5, SlicSolver};
use pseudorain::ImagePlane;

/// Exhaustive restricted-search assignment: for every pixel, scan all
/// centers in index order, keep those whose 2S x 2S window contains the
/// pixel, take the strictly smallest distance. No covering center means
/// the globally nearest one.
pub fn slic_oracle(solver: &SlicSolver, h: usize, w: usize) -> Vec<u32> {
    let s = solver.grid_interval();
    let m = solver.params().compactness;
    let dist = |c: &FeatureVector5, p: &FeatureVector5| {
        let dc = ((c.l - p.l).powi(2) + (c.a - p.a).powi(2) + (c.b - p.b).powi(2)).sqrt();
        let ds = ((c.x - p.x).powi(2) + (c.y - p.y).powi(2)).sqrt();
        ((dc / m).powi(2) + (ds / s).powi(2)).sqrt()
    };
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let p = solver.feature(x, y);
            let mut covered: Option<(f64, u32)> = None;
            let mut global = (f64::INFINITY, 0u32);
            for (i, c) in solver.centers().iter().enumerate() {
                let d = dist(c, &p);
                if d < global.0 {
                    global = (d, i as u32);
                }
                let inside = (x as f64 - c.x).abs() <= s && (y as f64 - c.y).abs() <= s;
                if inside && covered.is_none_or(|(bd, _)| d < bd) {
                    covered = Some((d, i as u32));
                }
            }
            out.push(covered.map_or(global.1, |(_, l)| l));
        }
    }
    out
}

/// Plain double loop over every offset, first minimum wins.
pub fn brute_match(hay: &ImagePlane, needle: &ImagePlane, mask: Option<&[bool]>) -> (usize, usize, f64) {
    let (nh, nw, ch) = (needle.height(), needle.width(), needle.channels());
    let mut best = (0, 0, f64::INFINITY);
    for y in 0..=hay.height() - nh {
        for x in 0..=hay.width() - nw {
            let (mut sum, mut n) = (0.0, 0usize);
            for dy in 0..nh {
                for dx in 0..nw {
                    if mask.is_some_and(|m| !m[dy * nw + dx]) {
                        continue;
                    }
                    for c in 0..ch {
                        sum += (hay.get(y + dy, x + dx, c) - needle.get(dy, dx, c)).powi(2);
                        n += 1;
                    }
                }
            }
            let mse = sum / n as f64;
            if mse < best.2 {
                best = (y, x, mse);
            }
        }
    }
    best
}

/// Per-window SSIM from the textbook formula, with 2-D Gaussian weights
/// built directly rather than separably.
pub fn ssim_oracle(a: &ImagePlane, b: &ImagePlane) -> f64 {
    let (h, w) = (a.height(), a.width());
    let mut n = h.min(w).min(11);
    if n % 2 == 0 {
        n -= 1;
    }
    let r = (n / 2) as f64;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (-((i as f64 - r).powi(2) + (j as f64 - r).powi(2)) / (2.0 * 1.5 * 1.5)).exp();
        }
    }
    let gs: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= gs);
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let (mut total, mut count) = (0.0, 0);
    for c in 0..a.channels() {
        for y in 0..=h - n {
            for x in 0..=w - n {
                let (mut mx, mut my) = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        mx += g[i * n + j] * a.get(y + i, x + j, c);
                        my += g[i * n + j] * b.get(y + i, x + j, c);
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let dx = a.get(y + i, x + j, c) - mx;
                        let dy = b.get(y + i, x + j, c) - my;
                        vx += g[i * n + j] * dx * dx;
                        vy += g[i * n + j] * dy * dy;
                        cov += g[i * n + j] * dx * dy;
                    }
                }
                total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
    }
    total / count as f64
}
