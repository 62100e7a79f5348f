use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudorain::metrics::LossWeights;
use pseudorain::pipeline::{run_pipeline, score_dirs, write_scores, ConfigOverrides, PipelineError};

#[derive(Parser)]
#[command(name = "pseudorain", version, about = "Synthesize and score pseudo-paired rainy/clean images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse source superpixels into target images, add rain, write pairs and a manifest.
    Synth(Box<SynthArgs>),
    /// Score predictions against same-named ground-truth images.
    Score(ScoreArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    pred_dir: PathBuf,
    #[arg(long)]
    gt_dir: PathBuf,
    /// Output JSON-lines file.
    #[arg(long)]
    out: PathBuf,
}

const EXIT_FATAL: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn synth(args: SynthArgs) -> Result<bool, PipelineError> {
    let base = match &args.config {
        Some(path) => ConfigOverrides::from_file(path)?,
        None => ConfigOverrides::default(),
    };
    let config = base.merged(args.overrides).resolve()?;
    let report = run_pipeline(&config)?;
    log::info!(
        "{} samples written, {} failed, manifest at {}",
        report.samples.len(),
        report.failures.len(),
        report.manifest_path.display()
    );
    Ok(!report.has_failures())
}

fn score(args: ScoreArgs) -> Result<bool, PipelineError> {
    let entries = score_dirs(&args.pred_dir, &args.gt_dir, &LossWeights::default())?;
    write_scores(&entries, &args.out)?;
    Ok(entries.iter().all(|e| e.error.is_none()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(*a),
        Command::Score(a) => score(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}
