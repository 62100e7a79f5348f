//! PNG/JPEG decoding and PNG encoding, 8 bits per channel.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use super::{ImageError, ImagePlane};

/// Loads a PNG or JPEG as a 3-channel plane (`byte / 255`).
pub fn load_image(path: impl AsRef<Path>) -> Result<ImagePlane, ImageError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    if !path.is_file() {
        return Err(ImageError::FileNotFound(shown));
    }
    let bytes = std::fs::read(path)?;
    let format = image::guess_format(&bytes).map_err(|_| ImageError::UnsupportedFormat(shown.clone()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(ImageError::UnsupportedFormat(format!("{shown} ({format:?})")));
    }
    let decoded = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| ImageError::DecodeError { path: shown, reason: e.to_string() })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    ImagePlane::from_u8(h as usize, w as usize, 3, rgb.as_raw())
}

/// Writes `img` as PNG: grayscale for one channel, RGB for three.
pub fn save_image(img: &ImagePlane, path: impl AsRef<Path>) -> Result<(), ImageError> {
    if img.data().iter().any(|s| !s.is_finite()) {
        return Err(ImageError::Invalid("non-finite sample".into()));
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes = img.to_u8();
    let dynamic = match img.channels() {
        1 => DynamicImage::ImageLuma8(
            GrayImage::from_raw(w, h, bytes).ok_or_else(|| ImageError::Invalid("buffer size".into()))?,
        ),
        3 => DynamicImage::ImageRgb8(
            RgbImage::from_raw(w, h, bytes).ok_or_else(|| ImageError::Invalid("buffer size".into()))?,
        ),
        c => return Err(ImageError::ChannelMismatch { expected: 3, actual: c }),
    };
    dynamic.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => ImageError::Io(io),
        other => ImageError::Io(std::io::Error::other(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_extreme_and_mid_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.png");
        let mut buf = RgbImage::new(2, 2);
        buf.put_pixel(0, 0, image::Rgb([128, 64, 32]));
        buf.put_pixel(1, 0, image::Rgb([255, 255, 255]));
        buf.save(&path).unwrap();

        let img = load_image(&path).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (2, 2, 3));
        assert!((img.get(0, 0, 0) - 128.0 / 255.0).abs() < 1e-12);
        assert!((img.get(0, 0, 0) - 0.50196).abs() < 1e-5);
        assert!((img.get(0, 0, 1) - 64.0 / 255.0).abs() < 1e-12);
        assert_eq!(img.pixel(0, 1), &[1.0, 1.0, 1.0]);
        assert_eq!(img.pixel(1, 1), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn grayscale_png_for_single_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let plane = ImagePlane::from_fn(3, 4, 1, |y, x, _| (y * 4 + x) as f64 / 11.0).unwrap();
        save_image(&plane, &path).unwrap();
        let decoded = image::open(&path).unwrap();
        assert!(matches!(decoded, DynamicImage::ImageLuma8(_)));
        // Loading always yields RGB; every channel carries the gray value.
        let back = load_image(&path).unwrap();
        for y in 0..3 {
            for x in 0..4 {
                for c in 0..3 {
                    assert!((back.get(y, x, c) - plane.get(y, x, 0)).abs() <= 0.5 / 255.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn error_paths() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_image(dir.path().join("missing.png")), Err(ImageError::FileNotFound(_))));

        let txt = dir.path().join("notes.png");
        std::fs::write(&txt, b"definitely not an image").unwrap();
        assert!(matches!(load_image(&txt), Err(ImageError::UnsupportedFormat(_))));

        let truncated = dir.path().join("trunc.png");
        let good = dir.path().join("good.png");
        save_image(&ImagePlane::filled(8, 8, 3, 0.5).unwrap(), &good).unwrap();
        let bytes = std::fs::read(&good).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_image(&truncated), Err(ImageError::DecodeError { .. })));

        let missing_dir = dir.path().join("nope").join("x.png");
        assert!(save_image(&ImagePlane::filled(1, 1, 3, 0.0).unwrap(), missing_dir).is_err());
    }
}
