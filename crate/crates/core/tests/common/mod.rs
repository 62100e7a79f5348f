#![allow(dead_code)]

pub mod oracle;

use std::path::Path;

use pseudorain::imagecore::save_image;
use pseudorain::ImagePlane;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise in [0, 1].
pub fn noise(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> ImagePlane {
    let data = (0..h * w * c).map(|_| rng.gen::<f64>()).collect();
    ImagePlane::new(h, w, c, data).unwrap()
}

/// Smooth blobs plus noise, so SLIC has structure to find.
pub fn scene(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ImagePlane {
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.0..h as f64),
                rng.gen_range(0.0..w as f64),
                rng.gen_range(3.0..(h.min(w) as f64 / 2.0).max(4.0)),
                [rng.gen(), rng.gen(), rng.gen()],
            )
        })
        .collect();
    let jitter: Vec<f64> = (0..h * w * 3).map(|_| rng.gen_range(-0.04..0.04)).collect();
    ImagePlane::from_fn(h, w, 3, |y, x, c| {
        let mut v = 0.35;
        for (cy, cx, r, col) in &blobs {
            let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
            if d2 < r * r {
                v = col[c];
            }
        }
        v + jitter[(y * w + x) * 3 + c]
    })
    .unwrap()
}

/// Writes `n` PNG scenes named `<prefix><i>.png` into `dir`.
pub fn write_scenes(dir: &Path, prefix: &str, n: usize, h: usize, w: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut r = rng(seed);
    for i in 0..n {
        save_image(&scene(&mut r, h, w), dir.join(format!("{prefix}{i}.png"))).unwrap();
    }
}

/// Every regular file under `dir`, as (relative path, bytes), sorted.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
