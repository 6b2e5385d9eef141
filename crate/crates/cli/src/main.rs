//! `eri`: command-line front end for the rigidity toolkit.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 success with at
//! least one undefined adaptation delay at the primary threshold.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eri_core::logio::LogFormat;
use eri_core::metrics::SmoothingAlignment;
use eri_core::report::{Scenario, SynthShape};

#[derive(Debug, Parser)]
#[command(
    name = "eri",
    version,
    about = "Rigidity diagnostics for continual learners trained on shortcut-laden tasks"
)]
pub struct Cli {
    /// JSON config file; explicit flags take precedence over its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Keep the T2 images of a CIFAR-100 binary and stamp the patch on shortcut-class images.
    Inject(InjectArgs),
    /// Keep the shortcut-class images of a CIFAR-100 binary and paint over the patch region.
    Mask(MaskArgs),
    /// Draw the superclass split for a benchmark seed.
    Plan(PlanArgs),
    /// Per-seed AD, PD and SFR_rel with regime labels, plus the summary table.
    Compute(ComputeArgs),
    /// AD over a grid of thresholds, exported as a heatmap.
    Sensitivity(SensitivityArgs),
    /// Every export at once: summary, heatmap and panel time series.
    Report(ReportArgs),
    /// Write a synthetic accuracy log for a demo scenario.
    Synth(SynthArgs),
    /// Check that each method is comparable with the baseline.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct LogArgs {
    /// Accuracy log (CSV or JSON).
    #[arg(long, value_name = "PATH")]
    pub log: PathBuf,
    /// Log format [default: from the file extension, CSV otherwise].
    #[arg(long)]
    pub format: Option<LogFormat>,
    /// Baseline method id [default: log metadata `baseline_method`, else scratch_t2].
    #[arg(long)]
    pub baseline: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Primary accuracy threshold [default: 0.6].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Smoothing window width in logged epochs [default: 3].
    #[arg(long)]
    pub window: Option<usize>,
    /// Smoothing window placement: centered or trailing [default: centered].
    #[arg(long)]
    pub alignment: Option<SmoothingAlignment>,
}

#[derive(Debug, Args)]
pub struct MarginArgs {
    /// Red-flag margin on AD, in effective epochs [default: 1.0].
    #[arg(long)]
    pub delta_ad: Option<f64>,
    /// Red-flag margin on PD [default: 0.01].
    #[arg(long)]
    pub delta_pd: Option<f64>,
    /// Red-flag margin on SFR_rel [default: 0.05].
    #[arg(long)]
    pub delta_sfr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PairingArgs {
    /// Require every continual seed to have a same-seed baseline run instead
    /// of falling back to the baseline seed mean.
    #[arg(long)]
    pub strict_pairing: bool,
}

#[derive(Debug, Args)]
pub struct PlanSource {
    /// Plan JSON written by `eri plan`.
    #[arg(long, value_name = "PATH", conflicts_with = "seed")]
    pub plan: Option<PathBuf>,
    /// Draw the plan from this seed instead of reading one.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PatchArgs {
    /// Patch top row [default: 0].
    #[arg(long)]
    pub patch_top: Option<usize>,
    /// Patch left column [default: 0].
    #[arg(long)]
    pub patch_left: Option<usize>,
    /// Patch side length in pixels [default: 4].
    #[arg(long)]
    pub patch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// CIFAR-100 binary input.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub plan: PlanSource,
    #[command(flatten)]
    pub patch: PatchArgs,
    /// Keep only the shortcut classes (the patched test set) instead of all of T2.
    #[arg(long)]
    pub shortcut_only: bool,
    /// Output binary; the plan and provenance are written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// CIFAR-100 binary input.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub plan: PlanSource,
    #[command(flatten)]
    pub patch: PatchArgs,
    /// Output binary; the plan and provenance are written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Shuffle seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit T1 superclasses, comma separated (needs --t2 and --sc).
    #[arg(long, value_delimiter = ',')]
    pub t1: Option<Vec<u8>>,
    /// Explicit T2 superclasses, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t2: Option<Vec<u8>>,
    /// Explicit shortcut superclasses, a subset of T2.
    #[arg(long, value_delimiter = ',')]
    pub sc: Option<Vec<u8>>,
    /// Output file [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[command(flatten)]
    pub margins: MarginArgs,
    #[command(flatten)]
    pub pairing: PairingArgs,
    /// Directory for eri_results.json, summary.csv, summary_full.csv and provenance.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Threshold grid, comma separated [default: 0.30,0.35,0.40,0.45,0.50,0.55,0.60].
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub pairing: PairingArgs,
    /// Directory for heatmap.csv, heatmap_seeds.csv and provenance.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Threshold grid, comma separated [default: 0.30,0.35,0.40,0.45,0.50,0.55,0.60].
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub margins: MarginArgs,
    #[command(flatten)]
    pub pairing: PairingArgs,
    /// Output directory for every export.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// red-flag, benign-avoidance, censored-continual or plateau-scratch.
    #[arg(long, default_value = "red-flag")]
    pub scenario: Scenario,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of seeds per method.
    #[arg(long, default_value_t = 4)]
    pub seeds: u32,
    /// Epoch budget.
    #[arg(long, default_value_t = 50)]
    pub budget: u32,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.005)]
    pub noise_sd: f64,
    /// Continual method id.
    #[arg(long, default_value = "cl")]
    pub method: String,
    /// Baseline method id.
    #[arg(long, default_value = eri_core::logio::DEFAULT_BASELINE)]
    pub baseline: String,
    /// Continual model overrides.
    #[command(flatten, next_help_heading = "Continual model")]
    pub cl: ClOverrides,
    /// Baseline model overrides.
    #[command(flatten, next_help_heading = "Baseline model")]
    pub scratch: ScratchOverrides,
    /// Output format [default: from the file extension, CSV otherwise].
    #[arg(long)]
    pub format: Option<LogFormat>,
    /// Output log.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClOverrides {
    #[arg(long = "cl-shape", id = "cl_shape")]
    pub shape: Option<SynthShape>,
    #[arg(long = "cl-asymptote", id = "cl_asymptote")]
    pub asymptote: Option<f64>,
    #[arg(long = "cl-midpoint", id = "cl_midpoint")]
    pub midpoint: Option<f64>,
    #[arg(long = "cl-rate", id = "cl_rate")]
    pub rate: Option<f64>,
    /// Patched minus masked accuracy.
    #[arg(long = "cl-delta", id = "cl_delta", allow_hyphen_values = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScratchOverrides {
    #[arg(long = "scratch-shape", id = "scratch_shape")]
    pub shape: Option<SynthShape>,
    #[arg(long = "scratch-asymptote", id = "scratch_asymptote")]
    pub asymptote: Option<f64>,
    #[arg(long = "scratch-midpoint", id = "scratch_midpoint")]
    pub midpoint: Option<f64>,
    #[arg(long = "scratch-rate", id = "scratch_rate")]
    pub rate: Option<f64>,
    /// Patched minus masked accuracy.
    #[arg(long = "scratch-delta", id = "scratch_delta", allow_hyphen_values = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub log: LogArgs,
    /// Check only this method [default: every continual method].
    #[arg(long)]
    pub method: Option<String>,
}

/// Successful completion, possibly with censoring to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Censored,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Censored) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_shows_defaults() {
        let mut cmd = Cli::command();
        let help = cmd
            .find_subcommand_mut("sensitivity")
            .unwrap()
            .render_long_help()
            .to_string();
        assert!(help.contains("[default: 0.6]"));
        assert!(help.contains("[default: 3]"));
        let grid: Vec<String> = eri_core::metrics::DEFAULT_TAU_GRID
            .iter()
            .map(|t| format!("{t:.2}"))
            .collect();
        assert!(help.contains(&format!("[default: {}]", grid.join(","))));
        assert_eq!(eri_core::metrics::DEFAULT_TAU, 0.6);
        assert_eq!(eri_core::metrics::DEFAULT_SMOOTHING_WIDTH, 3);
    }
}
