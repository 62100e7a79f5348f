//! C ABI for the pseudorain toolkit.
//!
//! Images cross the boundary as opaque `PrImage` handles owned by the
//! caller and released with `pr_image_free`. Every fallible call returns a
//! `PrStatus`; on failure `pr_last_error_message` describes the most recent
//! error on the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pseudorain::fusion::{fuse_patch, match_region, FusionError, FusionParams, FusionPath};
use pseudorain::imagecore::{load_image, save_image};
use pseudorain::metrics::{total_loss, LossWeights, MetricError};
use pseudorain::pipeline::{run_pipeline, ConfigOverrides, PipelineError};
use pseudorain::rainsyn::{synthesize_rain, RainError, RainParams};
use pseudorain::supgen::{slic_segment, SlicError, SlicParams, SuperpixelPatch};
use pseudorain::{ImageError, ImagePlane};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Decode = 4,
    DimensionMismatch = 5,
    BufferTooSmall = 6,
    Config = 7,
    Panic = 8,
}

/// Opaque image handle.
pub struct PrImage(ImagePlane);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrMatch {
    pub y: usize,
    pub x: usize,
    pub mse: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrScores {
    pub charbonnier: f64,
    pub fft_loss: f64,
    pub edge_loss: f64,
    pub total: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PrFusionParams {
    pub alpha: f64,
    pub mask_keep_frac: f64,
    pub min_patch_frac: f64,
    pub stride: usize,
}

/// Window a patch was fused into; `fallback` is 1 when the patch was rescaled.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrFusionWindow {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
    pub mse: f64,
    pub fallback: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrPipelineSummary {
    pub samples: usize,
    pub failures: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

struct Failure(PrStatus, String);

impl Failure {
    fn new(status: PrStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<ImageError> for Failure {
    fn from(e: ImageError) -> Self {
        let status = match &e {
            ImageError::FileNotFound(_) | ImageError::Io(_) => PrStatus::Io,
            ImageError::UnsupportedFormat(_) | ImageError::DecodeError { .. } => PrStatus::Decode,
            ImageError::ChannelMismatch { .. } | ImageError::DimensionMismatch(_) => PrStatus::DimensionMismatch,
            ImageError::Invalid(_) => PrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! wrapped_error {
    ($($ty:ty => $variant:path),* $(,)?) => {$(
        impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                match e {
                    $variant(inner) => inner.into(),
                    other => Failure(PrStatus::InvalidArgument, other.to_string()),
                }
            }
        }
    )*};
}

wrapped_error!(
    SlicError => SlicError::Image,
    FusionError => FusionError::Image,
    RainError => RainError::Image,
);

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        let status = match e {
            MetricError::DimensionMismatch(_) => PrStatus::DimensionMismatch,
            _ => PrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Image(inner) => inner.into(),
            PipelineError::Io(_) => Failure(PrStatus::Io, e.to_string()),
            other => Failure(PrStatus::Config, other.to_string()),
        }
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PrStatus::Panic
        }
    }
}

unsafe fn image<'a>(p: *const PrImage, what: &str) -> Result<&'a ImagePlane, Failure> {
    p.as_ref().map(|i| &i.0).ok_or_else(|| Failure::new(PrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(PrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::new(PrStatus::NullPointer, format!("{what} is null")));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(PrStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn boxed(img: ImagePlane) -> *mut PrImage {
    Box::into_raw(Box::new(PrImage(img)))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Creates an image from `height * width * channels` interleaved samples in
/// `[0, 1]`. `channels` is 1 or 3.
///
/// # Safety
/// `data` must be valid for `height * width * channels` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_image_new(
    height: usize,
    width: usize,
    channels: usize,
    data: *const f64,
    out: *mut *mut PrImage,
) -> PrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if data.is_null() {
            return Err(Failure::new(PrStatus::NullPointer, "data is null"));
        }
        let n = height
            .checked_mul(width)
            .and_then(|v| v.checked_mul(channels))
            .ok_or_else(|| Failure::new(PrStatus::InvalidArgument, "image size overflows"))?;
        let samples = std::slice::from_raw_parts(data, n).to_vec();
        *out = boxed(ImagePlane::new(height, width, channels, samples)?);
        Ok(())
    })
}

/// Decodes a PNG or JPEG file into a 3-channel image.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_image_load(path: *const c_char, out: *mut *mut PrImage) -> PrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = path_arg(path, "path")?;
        *out = boxed(load_image(path)?);
        Ok(())
    })
}

/// Writes `img` as 8-bit PNG.
///
/// # Safety
/// `img` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pr_image_save(img: *const PrImage, path: *const c_char) -> PrStatus {
    guard(|| {
        let img = image(img, "img")?;
        save_image(img, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pr_image_free(img: *mut PrImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// # Safety
/// `img` must be a live handle; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn pr_image_dims(
    img: *const PrImage,
    height: *mut usize,
    width: *mut usize,
    channels: *mut usize,
) -> PrStatus {
    guard(|| {
        let img = image(img, "img")?;
        for (p, v) in [(height, img.height()), (width, img.width()), (channels, img.channels())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the interleaved samples into `buf`, which must hold at least
/// `height * width * channels` values.
///
/// # Safety
/// `img` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pr_image_copy_data(img: *const PrImage, buf: *mut f64, len: usize) -> PrStatus {
    guard(|| {
        let img = image(img, "img")?;
        if buf.is_null() {
            return Err(Failure::new(PrStatus::NullPointer, "buf is null"));
        }
        let data = img.data();
        if len < data.len() {
            return Err(Failure::new(PrStatus::BufferTooSmall, format!("need {} samples, got {len}", data.len())));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// SLIC superpixels. Writes one label per pixel in row-major order into
/// `labels` (length at least `height * width`) and the region count into
/// `regions`.
///
/// # Safety
/// `img` must be a live handle; `labels` valid for `len` writes; `regions` writable or null.
#[no_mangle]
pub unsafe extern "C" fn pr_slic_segment(
    img: *const PrImage,
    k: usize,
    compactness: f64,
    labels: *mut u32,
    len: usize,
    regions: *mut usize,
) -> PrStatus {
    guard(|| {
        let img = image(img, "img")?;
        if labels.is_null() {
            return Err(Failure::new(PrStatus::NullPointer, "labels is null"));
        }
        if len < img.pixel_count() {
            return Err(Failure::new(
                PrStatus::BufferTooSmall,
                format!("need {} labels, got {len}", img.pixel_count()),
            ));
        }
        let seg = slic_segment(img, &SlicParams { k, compactness, ..Default::default() })?;
        ptr::copy_nonoverlapping(seg.labels.as_ptr(), labels, seg.labels.len());
        if let Some(r) = regions.as_mut() {
            *r = seg.region_count();
        }
        Ok(())
    })
}

/// Best MSE placement of `needle` inside `haystack`.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_match_region(
    haystack: *const PrImage,
    needle: *const PrImage,
    stride: usize,
    out: *mut PrMatch,
) -> PrStatus {
    guard(|| {
        let (hay, needle) = (image(haystack, "haystack")?, image(needle, "needle")?);
        let out = out_ptr(out, "out")?;
        let m = match_region(hay, needle, stride)?;
        *out = PrMatch { y: m.y, x: m.x, mse: m.mse };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn pr_fusion_params_default() -> PrFusionParams {
    let d = FusionParams::default();
    PrFusionParams {
        alpha: d.alpha,
        mask_keep_frac: d.mask_keep_frac,
        min_patch_frac: d.min_patch_frac,
        stride: d.stride,
    }
}

/// Blends the whole of `patch` into `target`, rescaling it when it fails the
/// size gate. `window` may be null.
///
/// # Safety
/// Handles must be live; `out` writable; `window` writable or null.
#[no_mangle]
pub unsafe extern "C" fn pr_fuse_patch(
    target: *const PrImage,
    patch: *const PrImage,
    params: PrFusionParams,
    seed: u64,
    out: *mut *mut PrImage,
    window: *mut PrFusionWindow,
) -> PrStatus {
    guard(|| {
        let (target, patch) = (image(target, "target")?, image(patch, "patch")?);
        let out = out_ptr(out, "out")?;
        let p = FusionParams {
            alpha: params.alpha,
            mask_keep_frac: params.mask_keep_frac,
            min_patch_frac: params.min_patch_frac,
            stride: params.stride,
        };
        let r = fuse_patch(target, &SuperpixelPatch::full(patch.clone()), &p, seed)?;
        if let Some(w) = window.as_mut() {
            *w = PrFusionWindow {
                top: r.window.top,
                left: r.window.left,
                height: r.window.height,
                width: r.window.width,
                mse: r.mse,
                fallback: (r.path == FusionPath::Fallback) as u8,
            };
        }
        *out = boxed(r.image);
        Ok(())
    })
}

/// Rain with default synthesis ranges, drawn under `seed`.
///
/// # Safety
/// `clean` must be a live 3-channel handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_synthesize_rain(clean: *const PrImage, seed: u64, out: *mut *mut PrImage) -> PrStatus {
    guard(|| {
        let clean = image(clean, "clean")?;
        let out = out_ptr(out, "out")?;
        *out = boxed(synthesize_rain(clean, &RainParams::default(), seed)?.rainy);
        Ok(())
    })
}

/// Losses and quality metrics of `pred` against `gt` with unit loss weights.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pr_score(pred: *const PrImage, gt: *const PrImage, out: *mut PrScores) -> PrStatus {
    guard(|| {
        let (pred, gt) = (image(pred, "pred")?, image(gt, "gt")?);
        let out = out_ptr(out, "out")?;
        let s = total_loss(pred, gt, &LossWeights::default())?;
        *out = PrScores {
            charbonnier: s.charbonnier,
            fft_loss: s.fft_loss,
            edge_loss: s.edge_loss,
            total: s.total,
            psnr_db: s.psnr_db,
            ssim: s.ssim,
        };
        Ok(())
    })
}

/// Runs the full synthesis pipeline described by a TOML config file.
/// Per-sample failures are counted in `summary`, not reported as errors.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `summary` writable or null.
#[no_mangle]
pub unsafe extern "C" fn pr_run_pipeline(config_path: *const c_char, summary: *mut PrPipelineSummary) -> PrStatus {
    guard(|| {
        let path = path_arg(config_path, "config_path")?;
        let config = ConfigOverrides::from_file(&path)?.resolve()?;
        let report = run_pipeline(&config)?;
        if let Some(s) = summary.as_mut() {
            *s = PrPipelineSummary { samples: report.samples.len(), failures: report.failures.len() };
        }
        Ok(())
    })
}
