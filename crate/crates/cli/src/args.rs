use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "pvqa",
    version,
    about = "Generate and evaluate pseudo-video multiple-choice QA datasets"
)]
pub struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample pseudo videos and questions; write the manifest and frames.
    Generate(GenArgs),
    /// Regenerate every item from its seed and check the recorded answers.
    Verify(VerifyArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
    /// Write a shuffled-frame variant of a manifest.
    Shuffle(ShuffleArgs),
    /// Query a remote inference endpoint for every item.
    Infer(InferArgs),
    /// Score predictions against a manifest.
    Score(ScoreArgs),
    /// Render a results table from a score report or published accuracies.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenArgs {
    /// Caption corpus: a COCO captions JSON or a JSON-lines file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// `coco` or `generic`.
    #[arg(long)]
    pub corpus_format: Option<String>,
    /// Directory image paths are relative to (default: the corpus file's directory).
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Number of items.
    #[arg(long)]
    pub count: Option<u64>,
    /// Maximum scenes per video (S).
    #[arg(long)]
    pub max_scenes: Option<usize>,
    /// Maximum frames per scene (F).
    #[arg(long)]
    pub max_frames: Option<usize>,
    /// Question kinds with weights, e.g. `R1:1,R3:2` or `all`.
    #[arg(long)]
    pub mix: Option<String>,
    /// Square frame side in pixels.
    #[arg(long)]
    pub resolution: Option<u32>,
    /// Write specs only, no pixels.
    #[arg(long)]
    pub spec_only: bool,
    /// PNG frames instead of JPEG.
    #[arg(long)]
    pub lossless: bool,
    #[arg(long, hide = true)]
    pub rotation_step_deg: Option<f64>,
    #[arg(long, hide = true)]
    pub rotation_clamp_deg: Option<f64>,
    #[arg(long, hide = true)]
    pub scale_step: Option<f64>,
    #[arg(long, hide = true)]
    pub scale_min: Option<f64>,
    #[arg(long, hide = true)]
    pub scale_max: Option<f64>,
    #[arg(long, hide = true)]
    pub translation_step: Option<f64>,
    #[arg(long, hide = true)]
    pub translation_clamp: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Manifest to check (default `<out>/manifest.jsonl`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Generation settings; by default read from the manifest's run_config.toml.
    #[command(flatten)]
    pub generation: GenArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Also write statistics as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShuffleArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Variant seed (default: the master seed).
    #[arg(long)]
    pub variant_seed: Option<u64>,
    /// Output file (default `<out>/manifest_shuffled.jsonl`).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Endpoint URL accepting `POST {prompt, images}`.
    #[arg(long)]
    pub url: String,
    /// Environment variable holding a bearer token.
    #[arg(long)]
    pub token_env: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// First retry delay in milliseconds.
    #[arg(long, default_value_t = 500)]
    pub backoff_ms: u64,
    /// Send base64 image bytes instead of paths.
    #[arg(long)]
    pub inline_images: bool,
    /// Directory frame paths are relative to (default: the manifest's directory).
    #[arg(long)]
    pub frame_root: Option<PathBuf>,
    /// Output file (default `<out>/predictions.jsonl`).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Predictions file (default `<out>/predictions.jsonl`).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Row label in the table.
    #[arg(long, default_value = "model")]
    pub label: String,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score report JSON written by `score` (default `<out>/score.json`).
    #[arg(long, conflicts_with = "accuracies")]
    pub score: Option<PathBuf>,
    /// Per-task accuracies instead of a score report, e.g. `AC=31.0,OC=59.4`.
    #[arg(long)]
    pub accuracies: Option<String>,
    #[arg(long, default_value = "model")]
    pub label: String,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
