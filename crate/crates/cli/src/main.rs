use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use holoquant_cli::config::SEED_ENV;
use holoquant_cli::{run_experiment, ConfigFile, Experiment, ExperimentConfig, Overrides};

/// Quantized-SLM hologram optimization experiments.
#[derive(Parser)]
#[command(name = "holoquant", version)]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-seed convergence of the configured search over every scheme.
    Convergence(Options),
    /// Error change as single pixels' phases are swept.
    PhaseSweep(Options),
    /// Error change as single pixels' amplitudes are swept.
    AmplitudeSweep(Options),
    /// How often a multi-level device beats binary at single pixels.
    WinRate(Options),
}

#[derive(Args)]
struct Options {
    /// Config file (flat TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input image (PGM or PNG, 8-bit grayscale).
    #[arg(long)]
    image: Option<PathBuf>,
    /// Scheme such as `phase:256`; repeat or comma-separate for several.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; overrides the config file and the HOLOQUANT_SEED variable.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace sampling interval in iterations.
    #[arg(long)]
    stride: Option<usize>,
    /// `eq2` or `power`.
    #[arg(long)]
    metric: Option<String>,
    /// `random` or `raster`.
    #[arg(long)]
    pixel_order: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

fn execute(experiment: Experiment, options: Options) -> Result<()> {
    let file = match &options.config {
        Some(path) => ConfigFile::load(path).context("config stage")?,
        None => ConfigFile::default(),
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let overrides = Overrides {
        image: options.image,
        schemes: options.schemes,
        iterations: options.iterations,
        runs: options.runs,
        seed: options.seed,
        stride: options.stride,
        metric: options.metric,
        pixel_order: options.pixel_order,
        out: options.out,
        workers: options.workers,
    };
    let config = ExperimentConfig::resolve(experiment, file, env_seed.as_deref(), overrides)
        .context("config stage")?;
    let artifacts = run_experiment(&config).with_context(|| format!("{experiment} stage"))?;
    for path in &artifacts.files {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, options) = match cli.experiment {
        Command::Convergence(o) => (Experiment::Convergence, o),
        Command::PhaseSweep(o) => (Experiment::PhaseSweep, o),
        Command::AmplitudeSweep(o) => (Experiment::AmplitudeSweep, o),
        Command::WinRate(o) => (Experiment::WinRate, o),
    };
    match execute(experiment, options) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holoquant: {e:#}");
            ExitCode::FAILURE
        }
    }
}
