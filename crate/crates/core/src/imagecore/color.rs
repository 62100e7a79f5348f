//! sRGB (D65) to CIELAB and BT.601 full-range YUV.

use super::{ImageError, ImagePlane};

/// Linear sRGB to XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// Reference white is the image of RGB (1,1,1) so that grays land exactly on a = b = 0.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const KR: f64 = 0.299;
const KB: f64 = 0.114;
const KG: f64 = 1.0 - KR - KB;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabPixel {
    #[inline]
    pub fn distance(&self, other: &LabPixel) -> f64 {
        let (dl, da, db) = (self.l - other.l, self.a - other.a, self.b - other.b);
        (dl * dl + da * da + db * db).sqrt()
    }
}

/// Row-major grid of Lab pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabGrid {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<LabPixel>,
}

impl LabGrid {
    #[inline]
    pub fn at(&self, y: usize, x: usize) -> &LabPixel {
        &self.pixels[y * self.width + x]
    }
}

#[inline]
fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub fn srgb_pixel_to_lab(rgb: [f64; 3]) -> LabPixel {
    let lin = rgb.map(srgb_to_linear);
    let mut xyz = [0.0; 3];
    for (row, out) in RGB_TO_XYZ.iter().zip(xyz.iter_mut()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    LabPixel { l: (116.0 * fy - 16.0).clamp(0.0, 100.0), a: 500.0 * (fx - fy), b: 200.0 * (fy - fz) }
}

pub fn rgb_to_lab(img: &ImagePlane) -> Result<LabGrid, ImageError> {
    img.ensure_channels(3)?;
    let pixels = img.data().chunks_exact(3).map(|p| srgb_pixel_to_lab([p[0], p[1], p[2]])).collect();
    Ok(LabGrid { height: img.height(), width: img.width(), pixels })
}

/// Three single-channel planes. `u` and `v` carry a +0.5 offset.
#[derive(Debug, Clone, PartialEq)]
pub struct YuvImage {
    pub y: ImagePlane,
    pub u: ImagePlane,
    pub v: ImagePlane,
}

impl YuvImage {
    pub fn new(y: ImagePlane, u: ImagePlane, v: ImagePlane) -> Result<Self, ImageError> {
        for p in [&y, &u, &v] {
            p.ensure_channels(1)?;
        }
        y.ensure_same_shape(&u)?;
        y.ensure_same_shape(&v)?;
        Ok(Self { y, u, v })
    }
}

#[inline]
pub fn rgb_pixel_to_yuv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let y = KR * r + KG * g + KB * b;
    let u = 0.5 * (b - y) / (1.0 - KB);
    let v = 0.5 * (r - y) / (1.0 - KR);
    [y, u + 0.5, v + 0.5]
}

#[inline]
pub fn yuv_pixel_to_rgb([y, u, v]: [f64; 3]) -> [f64; 3] {
    let (u, v) = (u - 0.5, v - 0.5);
    let r = y + 2.0 * (1.0 - KR) * v;
    let b = y + 2.0 * (1.0 - KB) * u;
    let g = (y - KR * r - KB * b) / KG;
    [r, g, b]
}

pub fn rgb_to_yuv(img: &ImagePlane) -> Result<YuvImage, ImageError> {
    img.ensure_channels(3)?;
    let n = img.pixel_count();
    let (mut ys, mut us, mut vs) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for p in img.data().chunks_exact(3) {
        let [y, u, v] = rgb_pixel_to_yuv([p[0], p[1], p[2]]);
        ys.push(y);
        us.push(u);
        vs.push(v);
    }
    let (h, w) = (img.height(), img.width());
    Ok(YuvImage {
        y: ImagePlane::from_clamped(h, w, 1, ys)?,
        u: ImagePlane::from_clamped(h, w, 1, us)?,
        v: ImagePlane::from_clamped(h, w, 1, vs)?,
    })
}

/// Inverse of [`rgb_to_yuv`]; out-of-gamut results are clamped to `[0, 1]`.
pub fn yuv_to_rgb(yuv: &YuvImage) -> Result<ImagePlane, ImageError> {
    for p in [&yuv.y, &yuv.u, &yuv.v] {
        p.ensure_channels(1)?;
    }
    yuv.y.ensure_same_shape(&yuv.u)?;
    yuv.y.ensure_same_shape(&yuv.v)?;
    let mut data = Vec::with_capacity(yuv.y.pixel_count() * 3);
    for ((&y, &u), &v) in yuv.y.data().iter().zip(yuv.u.data()).zip(yuv.v.data()) {
        data.extend(yuv_pixel_to_rgb([y, u, v]));
    }
    ImagePlane::from_clamped(yuv.y.height(), yuv.y.width(), 3, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(r: f64, g: f64, b: f64) -> ImagePlane {
        ImagePlane::new(1, 1, 3, vec![r, g, b]).unwrap()
    }

    #[test]
    fn lab_reference_points() {
        let white = rgb_to_lab(&px(1.0, 1.0, 1.0)).unwrap().pixels[0];
        assert!((white.l - 100.0).abs() < 1e-9);
        assert!(white.a.abs() < 1e-9 && white.b.abs() < 1e-9);

        let black = rgb_to_lab(&px(0.0, 0.0, 0.0)).unwrap().pixels[0];
        assert!(black.l.abs() < 1e-12 && black.a.abs() < 1e-12 && black.b.abs() < 1e-12);

        // Closed form: L = 116 * cbrt(((0.5 + 0.055) / 1.055)^2.4) - 16.
        let mid = rgb_to_lab(&px(0.5, 0.5, 0.5)).unwrap().pixels[0];
        let expected = 116.0 * ((0.555f64 / 1.055).powf(2.4)).cbrt() - 16.0;
        assert!((mid.l - expected).abs() < 1e-9);
        assert!((mid.l - 53.389).abs() < 1e-2);
        assert!(mid.a.abs() < 1e-9 && mid.b.abs() < 1e-9);
    }

    #[test]
    fn lab_primaries_match_published_values() {
        // Commonly tabulated sRGB/D65 values.
        let red = rgb_to_lab(&px(1.0, 0.0, 0.0)).unwrap().pixels[0];
        assert!((red.l - 53.24).abs() < 0.05 && (red.a - 80.09).abs() < 0.05 && (red.b - 67.20).abs() < 0.05);
        let blue = rgb_to_lab(&px(0.0, 0.0, 1.0)).unwrap().pixels[0];
        assert!((blue.l - 32.30).abs() < 0.05 && (blue.a - 79.19).abs() < 0.05 && (blue.b + 107.86).abs() < 0.05);
    }

    #[test]
    fn yuv_gray_axis() {
        for g in [0.0, 0.25, 0.5, 1.0] {
            let yuv = rgb_to_yuv(&px(g, g, g)).unwrap();
            assert!((yuv.y.data()[0] - g).abs() < 1e-12);
            assert!((yuv.u.data()[0] - 0.5).abs() < 1e-12);
            assert!((yuv.v.data()[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_mismatch() {
        let gray = ImagePlane::filled(2, 2, 1, 0.3).unwrap();
        assert!(matches!(rgb_to_lab(&gray), Err(ImageError::ChannelMismatch { .. })));
        assert!(matches!(rgb_to_yuv(&gray), Err(ImageError::ChannelMismatch { .. })));
    }
}
