//! Dense 2-D kernels and single-channel convolution.

use rayon::prelude::*;

/// Odd-sized kernel anchored at its center.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    /// Panics unless both sides are odd and `weights.len() == height * width`.
    pub fn new(height: usize, width: usize, weights: Vec<f64>) -> Self {
        assert!(height % 2 == 1 && width % 2 == 1, "kernel sides must be odd");
        assert_eq!(weights.len(), height * width);
        Self { height, width, weights }
    }

    pub fn identity() -> Self {
        Self::new(1, 1, vec![1.0])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.width + col]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Offsets `(dy, dx)` from the anchor of every nonzero weight.
    pub fn support(&self) -> Vec<(isize, isize)> {
        let (cy, cx) = ((self.height / 2) as isize, (self.width / 2) as isize);
        let mut out = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if self.at(r, c) != 0.0 {
                    out.push((r as isize - cy, c as isize - cx));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Mirror without repeating the edge sample (`dcb|abcd|cba`).
    Reflect,
    Zero,
}

#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

/// True 2-D convolution (kernel flipped) of a row-major `height x width` buffer.
pub fn convolve(src: &[f64], height: usize, width: usize, kernel: &Kernel2D, border: Border) -> Vec<f64> {
    assert_eq!(src.len(), height * width);
    let (kh, kw) = (kernel.height as isize, kernel.width as isize);
    let (cy, cx) = (kh / 2, kw / 2);
    let mut out = vec![0.0; height * width];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, dst) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..kh {
                let sy = y as isize + cy - i;
                let sy = match border {
                    Border::Reflect => reflect_index(sy, height),
                    Border::Zero if sy < 0 || sy >= height as isize => continue,
                    Border::Zero => sy as usize,
                };
                for j in 0..kw {
                    let w = kernel.weights[(i * kw + j) as usize];
                    if w == 0.0 {
                        continue;
                    }
                    let sx = x as isize + cx - j;
                    let sx = match border {
                        Border::Reflect => reflect_index(sx, width),
                        Border::Zero if sx < 0 || sx >= width as isize => continue,
                        Border::Zero => sx as usize,
                    };
                    acc += w * src[sy * width + sx];
                }
            }
            *dst = acc;
        }
    });
    out
}
