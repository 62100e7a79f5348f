use rand::Rng;

use crate::rng::rng_from_seed;

/// Bernoulli keep-mask selecting which patch pixels get blended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomMask {
    pub height: usize,
    pub width: usize,
    pub bits: Vec<bool>,
    pub seed: u64,
}

impl RandomMask {
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set_fraction(&self) -> f64 {
        self.bits.iter().filter(|&&b| b).count() as f64 / self.bits.len() as f64
    }
}

/// Each bit is set independently with probability `keep_frac`, drawn in
/// row-major order from a ChaCha8 stream seeded with `seed`.
pub fn make_random_mask(height: usize, width: usize, keep_frac: f64, seed: u64) -> RandomMask {
    let p = keep_frac.clamp(0.0, 1.0);
    let mut rng = rng_from_seed(seed);
    let bits = (0..height * width).map(|_| rng.gen_bool(p)).collect();
    RandomMask { height, width, bits, seed }
}
