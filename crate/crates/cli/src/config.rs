//! Experiment configuration: a flat TOML key/value file, environment, and
//! command-line overrides (in increasing precedence).
//!
//! Recognised keys:
//!
//! ```toml
//! image = "camera_64.pgm"          # PGM (P5) or PNG, 8-bit grayscale
//! crop = 64                        # optional centre crop to crop x crop
//! schemes = ["phase:2", "phase:256", "amplitude:2", "amplitude:256"]
//! algorithm = "best-value-ds"      # | "direct-search" | "simulated-annealing"
//! iterations = 60000
//! runs = 5
//! seed = 0                         # base seed; run k uses seed + k
//! stride = 10000                   # trace sampling interval
//! metric = "eq2"                   # | "power"
//! pixel_order = "random"           # | "raster"
//! target_scale = "device"          # | "none"
//! out = "results"
//! workers = 4
//! sample_count = 256               # sweep resolution
//! sweep_pixels = 10
//! amplitude_lo = 0.0
//! amplitude_hi = 2.0
//! pixel_count = 1000               # win-rate sample size
//! t_initial = 0.1                  # annealing; defaults derive from the initial error
//! t_final = 1e-7
//! ```
//!
//! Relative paths in the file are resolved against the file's directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use holoquant::{Algorithm, Metric, ModulationScheme, PixelOrder, Schedule};
use serde::Deserialize;

pub const SEED_ENV: &str = "HOLOQUANT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    PhaseSweep,
    AmplitudeSweep,
    WinRate,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::PhaseSweep => "phase-sweep",
            Experiment::AmplitudeSweep => "amplitude-sweep",
            Experiment::WinRate => "win-rate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "convergence" => Experiment::Convergence,
            "phase-sweep" => Experiment::PhaseSweep,
            "amplitude-sweep" => Experiment::AmplitudeSweep,
            "win-rate" => Experiment::WinRate,
            other => bail!("unknown experiment '{other}'"),
        })
    }
}

/// How the target is scaled before a device-specific run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetScale {
    /// Unit-magnitude start for phase devices, unit-peak start for amplitude devices.
    #[default]
    Device,
    /// Image values used as-is.
    None,
}

impl TargetScale {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetScale::Device => "device",
            TargetScale::None => "none",
        }
    }
}

impl FromStr for TargetScale {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "device" => TargetScale::Device,
            "none" | "raw" => TargetScale::None,
            other => bail!("unknown target_scale '{other}'"),
        })
    }
}

/// Contents of a config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub image: Option<PathBuf>,
    pub crop: Option<usize>,
    pub schemes: Option<Vec<String>>,
    pub algorithm: Option<String>,
    pub iterations: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub metric: Option<String>,
    pub pixel_order: Option<String>,
    pub target_scale: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub sample_count: Option<usize>,
    pub sweep_pixels: Option<usize>,
    pub amplitude_lo: Option<f64>,
    pub amplitude_hi: Option<f64>,
    pub pixel_count: Option<usize>,
    pub t_initial: Option<f64>,
    pub t_final: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing config")
    }

    /// Reads a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut file = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut file.image, &mut file.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub image: Option<PathBuf>,
    pub schemes: Vec<String>,
    pub iterations: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub metric: Option<String>,
    pub pixel_order: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub image_path: PathBuf,
    pub crop: Option<usize>,
    pub schemes: Vec<ModulationScheme>,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub sample_stride: usize,
    pub metric: Metric,
    pub pixel_order: PixelOrder,
    pub target_scale: TargetScale,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub sample_count: usize,
    pub sweep_pixels: usize,
    pub amplitude_range: (f64, f64),
    pub pixel_count: usize,
    pub schedule: Schedule,
}

pub const DEFAULT_SCHEMES: [&str; 4] = ["phase:2", "phase:256", "amplitude:2", "amplitude:256"];

impl ExperimentConfig {
    /// Merges file, environment seed and overrides over the defaults.
    pub fn resolve(
        experiment: Experiment,
        file: ConfigFile,
        env_seed: Option<&str>,
        overrides: Overrides,
    ) -> Result<Self> {
        let image_path = overrides
            .image
            .or(file.image)
            .context("no image given (set `image` in the config or pass --image)")?;

        let scheme_strings: Vec<String> = if !overrides.schemes.is_empty() {
            overrides
                .schemes
                .iter()
                .flat_map(|s| s.split(','))
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        } else if let Some(s) = file.schemes {
            s
        } else {
            DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect()
        };
        let schemes = scheme_strings
            .iter()
            .map(|s| s.parse::<ModulationScheme>())
            .collect::<Result<Vec<_>, _>>()?;
        if schemes.is_empty() {
            bail!("at least one scheme is required");
        }

        let env_seed = env_seed
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .with_context(|| format!("{SEED_ENV} is not an unsigned integer: '{s}'"))
            })
            .transpose()?;
        let base_seed = overrides.seed.or(env_seed).or(file.seed).unwrap_or(0);

        let metric = match overrides.metric.or(file.metric) {
            Some(m) => m.parse()?,
            None => Metric::Eq2,
        };
        let pixel_order = match overrides.pixel_order.or(file.pixel_order) {
            Some(p) => p.parse()?,
            None => PixelOrder::Random,
        };
        let algorithm = match file.algorithm {
            Some(a) => a.parse()?,
            None => Algorithm::BestValueDs,
        };
        let target_scale = match file.target_scale {
            Some(s) => s.parse()?,
            None => TargetScale::Device,
        };

        let config = ExperimentConfig {
            experiment,
            image_path,
            crop: file.crop,
            schemes,
            algorithm,
            iterations: overrides.iterations.or(file.iterations).unwrap_or(60_000),
            runs: overrides.runs.or(file.runs).unwrap_or(5),
            base_seed,
            sample_stride: overrides.stride.or(file.stride).unwrap_or(10_000),
            metric,
            pixel_order,
            target_scale,
            output_dir: overrides
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("results")),
            workers: overrides.workers.or(file.workers),
            sample_count: file.sample_count.unwrap_or(256),
            sweep_pixels: file.sweep_pixels.unwrap_or(10),
            amplitude_range: (
                file.amplitude_lo.unwrap_or(0.0),
                file.amplitude_hi.unwrap_or(2.0),
            ),
            pixel_count: file.pixel_count.unwrap_or(1000),
            schedule: Schedule {
                t_initial: file.t_initial,
                t_final: file.t_final,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            bail!("runs must be at least 1");
        }
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.sample_stride == 0 {
            bail!("stride must be at least 1");
        }
        if self.sample_count < 2 {
            bail!("sample_count must be at least 2");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(())
    }
}
