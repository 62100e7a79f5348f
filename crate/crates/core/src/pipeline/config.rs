use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::fusion::FusionParams;
use crate::metrics::LossWeights;
use crate::rainsyn::RainParams;
use crate::supgen::SlicParams;

/// Fully resolved run configuration.
///
/// `out_dir` and `workers` only decide where and how fast the run happens,
/// never what it produces, so they are left out of the serialized form that
/// heads the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source_dir: PathBuf,
    pub target_dir: PathBuf,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub seed: u64,
    pub slic: SlicParams,
    pub fusion: FusionParams,
    pub rain: RainParams,
    pub loss: LossWeights,
    pub patches_per_target: usize,
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
    pub emit_debug: bool,
}

fn default_workers() -> usize {
    1
}

impl PipelineConfig {
    pub fn new(source_dir: impl Into<PathBuf>, target_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source_dir: source_dir.into(),
            target_dir: target_dir.into(),
            out_dir: out_dir.into(),
            seed: 0,
            slic: SlicParams::default(),
            fusion: FusionParams::default(),
            rain: RainParams::default(),
            loss: LossWeights::default(),
            patches_per_target: 3,
            workers: 1,
            emit_debug: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.slic.validate().or_else(|e| bad(e.to_string()))?;
        self.fusion.validate().or_else(|e| bad(e.to_string()))?;
        self.rain.validate().or_else(|e| bad(e.to_string()))?;
        self.loss.validate().or_else(|e| bad(e.to_string()))?;
        if self.workers < 1 {
            return bad("workers must be >= 1".into());
        }
        for (name, dir) in [("source", &self.source_dir), ("target", &self.target_dir)] {
            if !dir.is_dir() {
                return bad(format!("{name} directory {} does not exist", dir.display()));
            }
        }
        Ok(())
    }
}

/// Flat key/value settings shared by the config file and the command line.
/// Every field is optional; command-line values win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    /// Directory of source-domain clean images (superpixel donors).
    #[arg(long)]
    pub source_dir: Option<PathBuf>,
    /// Directory of target-domain clean images.
    #[arg(long)]
    pub target_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long = "out")]
    #[serde(rename = "out")]
    pub out_dir: Option<PathBuf>,
    /// Global seed; every sample derives its own stream from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fusion weight kept by the target.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Target superpixel count per source image.
    #[arg(long)]
    pub superpixels: Option<usize>,
    /// SLIC compactness m.
    #[arg(long)]
    pub compactness: Option<f64>,
    /// SLIC iteration cap.
    #[arg(long)]
    pub slic_max_iters: Option<usize>,
    /// Fragments smaller than this fraction of S^2 are merged.
    #[arg(long)]
    pub min_region_frac: Option<f64>,
    /// Fraction of patch pixels kept by the random mask.
    #[arg(long)]
    pub keep_frac: Option<f64>,
    /// Patch/target area ratio below which the patch is rescaled.
    #[arg(long)]
    pub min_patch_frac: Option<f64>,
    /// Sliding-window step of the matcher.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Superpixels fused into each target.
    #[arg(long)]
    pub patches_per_target: Option<usize>,
    /// Worker threads; does not affect output.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write label maps and streak masks under out/debug.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub emit_debug: Option<bool>,
    /// Salt density range.
    #[arg(long)]
    pub density_min: Option<f64>,
    #[arg(long)]
    pub density_max: Option<f64>,
    /// Odd Gaussian kernel side.
    #[arg(long)]
    pub gauss_kernel: Option<usize>,
    /// Gaussian standard deviation.
    #[arg(long)]
    pub gauss_sigma: Option<f64>,
    /// Streak length range in pixels.
    #[arg(long)]
    pub length_min: Option<usize>,
    #[arg(long)]
    pub length_max: Option<usize>,
    /// Streak angle range in degrees from horizontal.
    #[arg(long)]
    pub angle_min: Option<f64>,
    #[arg(long)]
    pub angle_max: Option<f64>,
    /// Streak width range in pixels.
    #[arg(long)]
    pub width_min: Option<usize>,
    #[arg(long)]
    pub width_max: Option<usize>,
    /// Luminance mix coefficient range.
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    /// Charbonnier loss weight.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Frequency loss weight.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Edge loss weight.
    #[arg(long)]
    pub lambda3: Option<f64>,
    /// Charbonnier epsilon, within [1e-6, 1e-3].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl ConfigOverrides {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Field-wise merge; values in `over` replace those in `self`.
    pub fn merged(self, over: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigOverrides { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            source_dir,
            target_dir,
            out_dir,
            seed,
            alpha,
            superpixels,
            compactness,
            slic_max_iters,
            min_region_frac,
            keep_frac,
            min_patch_frac,
            stride,
            patches_per_target,
            workers,
            emit_debug,
            density_min,
            density_max,
            gauss_kernel,
            gauss_sigma,
            length_min,
            length_max,
            angle_min,
            angle_max,
            width_min,
            width_max,
            beta_min,
            beta_max,
            lambda1,
            lambda2,
            lambda3,
            epsilon
        )
    }

    pub fn resolve(self) -> Result<PipelineConfig, PipelineError> {
        let missing = |k: &str| PipelineError::Config(format!("missing required setting `{k}`"));
        let source = self.source_dir.ok_or_else(|| missing("source_dir"))?;
        let target = self.target_dir.ok_or_else(|| missing("target_dir"))?;
        let out = self.out_dir.ok_or_else(|| missing("out"))?;
        let mut c = PipelineConfig::new(source, target, out);
        take!(c.seed, self.seed);
        take!(c.fusion.alpha, self.alpha);
        take!(c.slic.k, self.superpixels);
        take!(c.slic.compactness, self.compactness);
        take!(c.slic.max_iters, self.slic_max_iters);
        take!(c.slic.min_region_frac, self.min_region_frac);
        take!(c.fusion.mask_keep_frac, self.keep_frac);
        take!(c.fusion.min_patch_frac, self.min_patch_frac);
        take!(c.fusion.stride, self.stride);
        take!(c.patches_per_target, self.patches_per_target);
        take!(c.workers, self.workers);
        take!(c.emit_debug, self.emit_debug);
        take!(c.rain.density[0], self.density_min);
        take!(c.rain.density[1], self.density_max);
        take!(c.rain.gauss_kernel, self.gauss_kernel);
        take!(c.rain.gauss_sigma, self.gauss_sigma);
        take!(c.rain.length[0], self.length_min);
        take!(c.rain.length[1], self.length_max);
        take!(c.rain.angle[0], self.angle_min);
        take!(c.rain.angle[1], self.angle_max);
        take!(c.rain.width[0], self.width_min);
        take!(c.rain.width[1], self.width_max);
        take!(c.rain.beta[0], self.beta_min);
        take!(c.rain.beta[1], self.beta_max);
        take!(c.loss.lambda1, self.lambda1);
        take!(c.loss.lambda2, self.lambda2);
        take!(c.loss.lambda3, self.lambda3);
        take!(c.loss.epsilon, self.epsilon);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_overrides_file() {
        let file: ConfigOverrides = toml::from_str(
            r#"
            source_dir = "src"
            target_dir = "tgt"
            out = "o"
            seed = 5
            alpha = 0.4
            beta_min = 0.9
            emit_debug = true
            "#,
        )
        .unwrap();
        let cli = ConfigOverrides { alpha: Some(0.6), out_dir: Some("elsewhere".into()), ..Default::default() };
        let c = file.merged(cli).resolve().unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.fusion.alpha, 0.6);
        assert_eq!(c.out_dir, PathBuf::from("elsewhere"));
        assert_eq!(c.rain.beta, [0.9, 0.95]);
        assert!(c.emit_debug);
        assert_eq!(c.slic.k, 50);
        assert_eq!(c.patches_per_target, 3);
    }

    #[test]
    fn unknown_keys_and_missing_dirs_are_errors() {
        assert!(toml::from_str::<ConfigOverrides>("colour = 3").is_err());
        let partial = ConfigOverrides { source_dir: Some("a".into()), ..Default::default() };
        assert!(matches!(partial.resolve(), Err(PipelineError::Config(_))));
    }
}
