//! Directory-level driver: superpixels from source images are fused into
//! each target image, rain is synthesized on the result, and both images
//! plus a manifest line are written per target.
//!
//! Sample `i` draws all of its randomness from `derive_seed(seed, i)`, so
//! the output does not depend on worker count or completion order.

mod config;
mod manifest;

pub use config::{ConfigOverrides, PipelineConfig};
pub use manifest::{read_manifest, write_manifest, ManifestEntry, ManifestHeader};

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{fuse_fallback, fuse_forward, fuse_patch, FusionError, FusionPath};
use crate::imagecore::{load_image, save_image, ImageError, ImagePlane};
use crate::metrics::{total_loss, LossWeights, MetricError, ScoreReport};
use crate::rainsyn::{render_rain, synthesize_rain, DrawnRain, RainError};
use crate::rng::{derive_seed, rng_from_seed};
use crate::supgen::{extract_patches, render_labels, slic_segment, SlicError, SuperpixelLabeling, SuperpixelPatch};

/// Stream index reserved for the source-order shuffle.
const SOURCE_ORDER_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no images found in {0}")]
    EmptyInputDir(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Slic(#[from] SlicError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Rain(#[from] RainError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One blended superpixel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub label: u32,
    pub path: FusionPath,
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
    pub mse: f64,
    pub mask_seed: u64,
}

/// Everything drawn at random for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnParams {
    pub sample_seed: u64,
    pub alpha: f64,
    pub patches: Vec<PatchRecord>,
    pub rain: DrawnRain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub index: usize,
    pub id: String,
    /// Relative to the output directory.
    pub rainy_path: String,
    pub clean_path: String,
    pub source_image: String,
    pub target_image: String,
    pub drawn_params: DrawnParams,
    pub scores: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub id: String,
    pub source_image: String,
    pub target_image: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub samples: Vec<PairedSample>,
    pub failures: Vec<SampleFailure>,
    pub manifest_path: PathBuf,
}

impl PipelineReport {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// PNG/JPEG files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(PipelineError::EmptyInputDir(dir.to_path_buf()));
    }
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sample_id(index: usize, target: &Path) -> String {
    let stem: String = target
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:05}_{stem}")
}

struct Segmented {
    labeling: SuperpixelLabeling,
    patches: Vec<SuperpixelPatch>,
}

/// Shared, read-only state for one run.
pub struct RunContext {
    config: PipelineConfig,
    sources: Vec<PathBuf>,
    targets: Vec<PathBuf>,
    source_order: Vec<usize>,
    segmented: Vec<OnceLock<Result<Arc<Segmented>, String>>>,
}

impl RunContext {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let sources = list_images(&config.source_dir)?;
        let targets = list_images(&config.target_dir)?;
        let mut source_order: Vec<usize> = (0..sources.len()).collect();
        source_order.shuffle(&mut rng_from_seed(derive_seed(config.seed, SOURCE_ORDER_STREAM)));
        let segmented = (0..sources.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { config, sources, targets, source_order, segmented })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    /// Source image paired with target `index`: round-robin over a seeded shuffle.
    pub fn source_for(&self, index: usize) -> usize {
        self.source_order[index % self.source_order.len()]
    }

    fn segmentation(&self, source: usize) -> Result<Arc<Segmented>, PipelineError> {
        self.segmented[source]
            .get_or_init(|| {
                let run = || -> Result<Segmented, PipelineError> {
                    let image = load_image(&self.sources[source])?;
                    let labeling = slic_segment(&image, &self.config.slic)?;
                    let patches = extract_patches(&image, &labeling)?;
                    Ok(Segmented { labeling, patches })
                };
                run().map(Arc::new).map_err(|e| format!("{}: {e}", self.sources[source].display()))
            })
            .clone()
            .map_err(PipelineError::Config)
    }

    fn blank_failure(&self, index: usize, error: String) -> SampleFailure {
        SampleFailure {
            index,
            id: sample_id(index, &self.targets[index]),
            source_image: file_name(&self.sources[self.source_for(index)]),
            target_image: file_name(&self.targets[index]),
            error,
        }
    }

    /// Produces the clean/rainy pair for target `index` in memory.
    pub fn synthesize(&self, index: usize) -> Result<SynthesizedPair, PipelineError> {
        let cfg = &self.config;
        let sample_seed = derive_seed(cfg.seed, index as u64);
        let mut rng = rng_from_seed(sample_seed);
        let mut clean = load_image(&self.targets[index])?;
        let mut records = Vec::new();
        let mut labeling = None;

        if cfg.patches_per_target > 0 {
            let seg = self.segmentation(self.source_for(index))?;
            let amount = cfg.patches_per_target.min(seg.patches.len());
            let picks = rand::seq::index::sample(&mut rng, seg.patches.len(), amount).into_vec();
            for pick in picks {
                let patch = &seg.patches[pick];
                let mask_seed: u64 = rng.gen();
                match fuse_patch(&clean, patch, &cfg.fusion, mask_seed) {
                    Ok(fused) => {
                        records.push(PatchRecord {
                            label: patch.source_label,
                            path: fused.path,
                            top: fused.window.top,
                            left: fused.window.left,
                            height: fused.window.height,
                            width: fused.window.width,
                            mse: fused.mse,
                            mask_seed,
                        });
                        clean = fused.image;
                    }
                    Err(FusionError::EmptyPatch(..)) => {
                        log::debug!("sample {index}: patch {} vanished when rescaled", patch.source_label);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            labeling = Some(seg.clone());
        }

        let rain_seed: u64 = rng.gen();
        let rain = synthesize_rain(&clean, &cfg.rain, rain_seed)?;
        Ok(SynthesizedPair {
            clean,
            rainy: rain.rainy,
            streaks: rain.mask.plane,
            labels: labeling.map(|s| render_labels(&s.labeling)),
            drawn: DrawnParams { sample_seed, alpha: cfg.fusion.alpha, patches: records, rain: rain.drawn },
        })
    }

    /// Rebuilds a recorded sample from its drawn parameters alone.
    pub fn replay(&self, sample: &PairedSample) -> Result<(ImagePlane, ImagePlane), PipelineError> {
        let mut clean = load_image(self.config.target_dir.join(&sample.target_image))?;
        let mut fusion = self.config.fusion;
        fusion.alpha = sample.drawn_params.alpha;
        if !sample.drawn_params.patches.is_empty() {
            let source = self
                .sources
                .iter()
                .position(|p| file_name(p) == sample.source_image)
                .ok_or_else(|| PipelineError::Config(format!("unknown source {}", sample.source_image)))?;
            let seg = self.segmentation(source)?;
            for rec in &sample.drawn_params.patches {
                let patch = seg
                    .patches
                    .iter()
                    .find(|p| p.source_label == rec.label)
                    .ok_or_else(|| PipelineError::Config(format!("no superpixel {}", rec.label)))?;
                let fused = match rec.path {
                    FusionPath::Forward => fuse_forward(&clean, patch, &fusion, rec.mask_seed)?,
                    FusionPath::Fallback => fuse_fallback(&clean, patch, &fusion, rec.mask_seed)?,
                };
                clean = fused.image;
            }
        }
        let rainy = render_rain(&clean, &sample.drawn_params.rain)?.rainy;
        Ok((clean, rainy))
    }

    fn emit(&self, index: usize) -> Result<PairedSample, PipelineError> {
        let cfg = &self.config;
        let pair = self.synthesize(index)?;
        let id = sample_id(index, &self.targets[index]);
        let rainy_path = format!("rainy/{id}.png");
        let clean_path = format!("clean/{id}.png");
        save_image(&pair.rainy, cfg.out_dir.join(&rainy_path))?;
        save_image(&pair.clean, cfg.out_dir.join(&clean_path))?;
        if cfg.emit_debug {
            let debug = cfg.out_dir.join("debug");
            if let Some(labels) = &pair.labels {
                save_image(labels, debug.join(format!("{id}_labels.png")))?;
            }
            save_image(&pair.streaks, debug.join(format!("{id}_mask.png")))?;
        }
        // Score what was written, not the pre-quantization buffers.
        let scores = total_loss(&pair.rainy.quantized(), &pair.clean.quantized(), &cfg.loss)?;
        Ok(PairedSample {
            index,
            id,
            rainy_path,
            clean_path,
            source_image: file_name(&self.sources[self.source_for(index)]),
            target_image: file_name(&self.targets[index]),
            drawn_params: pair.drawn,
            scores,
        })
    }
}

/// In-memory output of one sample.
#[derive(Debug, Clone)]
pub struct SynthesizedPair {
    pub clean: ImagePlane,
    pub rainy: ImagePlane,
    pub streaks: ImagePlane,
    pub labels: Option<ImagePlane>,
    pub drawn: DrawnParams,
}

/// Processes every target image and writes `manifest.jsonl`. Per-sample
/// failures are logged and recorded; only setup problems abort the run.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    let ctx = RunContext::new(config.clone())?;
    let out = &config.out_dir;
    std::fs::create_dir_all(out.join("rainy"))?;
    std::fs::create_dir_all(out.join("clean"))?;
    if config.emit_debug {
        std::fs::create_dir_all(out.join("debug"))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let entries: Vec<ManifestEntry> = pool.install(|| {
        (0..ctx.target_count())
            .into_par_iter()
            .map(|i| match ctx.emit(i) {
                Ok(s) => ManifestEntry::Ok(s),
                Err(e) => {
                    log::warn!("sample {i} ({}) failed: {e}", ctx.targets[i].display());
                    ManifestEntry::Failed(ctx.blank_failure(i, e.to_string()))
                }
            })
            .collect()
    });

    let manifest_path = out.join("manifest.jsonl");
    write_manifest(&ManifestHeader::new(config), &entries, &manifest_path)?;
    let (mut samples, mut failures) = (Vec::new(), Vec::new());
    for e in entries {
        match e {
            ManifestEntry::Ok(s) => samples.push(s),
            ManifestEntry::Failed(f) => failures.push(f),
        }
    }
    Ok(PipelineReport { samples, failures, manifest_path })
}

/// Score line for one prediction/ground-truth pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Scores every image in `pred_dir` against the same-named file in `gt_dir`.
pub fn score_dirs(pred_dir: &Path, gt_dir: &Path, weights: &LossWeights) -> Result<Vec<ScoreEntry>, PipelineError> {
    weights.validate()?;
    let preds = list_images(pred_dir)?;
    Ok(preds
        .par_iter()
        .map(|pred| {
            let name = file_name(pred);
            let gt = gt_dir.join(&name);
            let result = (|| -> Result<ScoreReport, PipelineError> {
                let p = load_image(pred)?;
                let g = load_image(&gt)?;
                Ok(total_loss(&p, &g, weights)?)
            })();
            match result {
                Ok(s) => ScoreEntry { name, scores: Some(s), error: None },
                Err(e) => ScoreEntry { name, scores: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

pub fn write_scores(entries: &[ScoreEntry], path: &Path) -> Result<(), PipelineError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for e in entries {
        let v = serde_json::to_value(e).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}
