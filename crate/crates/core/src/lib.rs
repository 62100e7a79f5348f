//! Pseudo-paired (rainy, clean) sample synthesis for adapting deraining
//! models to a new scene using only clean target-domain images.
//!
//! The chain per sample:
//! 1. [`supgen`] cuts a source image into SLIC superpixels.
//! 2. [`fusion`] blends a few superpixels into the clean target image at the
//!    window where they match best (sliding-window MSE).
//! 3. [`rainsyn`] grows a streak mask (salt noise, Gaussian blur, motion
//!    blur) and mixes it into the luminance channel.
//!
//! [`metrics`] holds the training losses plus PSNR/SSIM; [`pipeline`]
//! drives whole directories and writes a reproducibility manifest.

pub mod fusion;
pub mod imagecore;
pub mod metrics;
pub mod pipeline;
pub mod rainsyn;
pub mod rng;
pub mod supgen;

pub use imagecore::{ImageError, ImagePlane};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
