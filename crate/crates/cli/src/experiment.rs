//! Experiment runners behind the command-line subcommands.

use anyhow::{bail, Context, Result};
use holoquant::exec::{map_slice, with_workers};
use holoquant::perturb::sample_pixels;
use holoquant::search::{run, TraceSample};
use holoquant::target::continuous_hologram;
use holoquant::{
    amplitude_sweep, build_target, device_scaled_target, dft, load_grayscale, phase_sweep,
    random_phase, relative_error_pct, symmetrize_180, win_rate, ComplexField, ErrorValue,
    ModulationKind, ModulationScheme, Parallelism, RealGrid, RunConfig, SweepCurve,
};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, TargetScale};
use crate::output::{mean_std, slug, Artifacts, Csv};

/// Loads the image, applies the optional centre crop, trims to even dimensions and
/// symmetrizes under 180 degree rotation.
pub fn load_magnitudes(config: &ExperimentConfig) -> Result<RealGrid> {
    let image = load_grayscale(&config.image_path)
        .with_context(|| format!("loading image {}", config.image_path.display()))?;
    let image = match config.crop {
        Some(c) => image
            .center_crop(c, c)
            .with_context(|| format!("cropping image to {c}x{c}"))?,
        None => image,
    };
    let image = image.crop_to_even().context("cropping image to even dimensions")?;
    Ok(symmetrize_180(&image))
}

/// Complex target for one device kind: seeded random phase, optionally rescaled
/// onto the device's scale.
pub fn device_target(
    magnitudes: &RealGrid,
    seed: u64,
    kind: ModulationKind,
    scale: TargetScale,
) -> Result<ComplexField> {
    let phases = random_phase(magnitudes.width(), magnitudes.height(), seed)?;
    let target = build_target(magnitudes, &phases)?;
    Ok(match scale {
        TargetScale::Device => device_scaled_target(&target, kind)?,
        TargetScale::None => target,
    })
}

/// Error of the unquantized starting hologram, shared by every level count of a kind.
pub fn continuous_error(target: &ComplexField, kind: ModulationKind, config: &ExperimentConfig) -> Result<f64> {
    let start = continuous_hologram(target, kind)?;
    Ok(config.metric.evaluate(target, &dft(&start)?)?.0)
}

fn inner_parallelism(jobs: usize) -> Parallelism {
    if jobs > 1 {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub initial_error: f64,
    pub final_error: f64,
    /// Error of the unquantized starting hologram on the same target.
    pub reference_error: f64,
    /// Final error relative to `reference_error`, in percent.
    pub relative_final_error_pct: f64,
    /// Final error relative to the run's own first trace sample, in percent.
    pub relative_to_iteration0_pct: f64,
    pub accepted: usize,
    #[serde(skip)]
    pub samples: Vec<TraceSample>,
    #[serde(skip)]
    pub replay_magnitudes: RealGrid,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeAggregate {
    pub scheme: String,
    pub mean_relative_final_error_pct: f64,
    pub std_relative_final_error_pct: f64,
    pub mean_relative_to_iteration0_pct: f64,
    pub runs: Vec<RunRecord>,
    #[serde(skip)]
    pub iterations: Vec<usize>,
    #[serde(skip)]
    pub mean: Vec<f64>,
    #[serde(skip)]
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateTrace {
    pub experiment: &'static str,
    pub algorithm: String,
    pub metric: &'static str,
    pub pixel_order: &'static str,
    pub target_scale: &'static str,
    pub width: usize,
    pub height: usize,
    pub iterations: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub sample_stride: usize,
    pub schemes: Vec<SchemeAggregate>,
}

impl AggregateTrace {
    pub fn scheme(&self, label: &str) -> Option<&SchemeAggregate> {
        self.schemes.iter().find(|s| s.scheme == label)
    }
}

struct Job {
    scheme: usize,
    run: usize,
}

fn run_job(
    config: &ExperimentConfig,
    magnitudes: &RealGrid,
    scheme: &ModulationScheme,
    run_index: usize,
    parallelism: Parallelism,
) -> Result<RunRecord> {
    let seed = config.base_seed.wrapping_add(run_index as u64);
    let kind = scheme.kind();
    let target = device_target(magnitudes, seed, kind, config.target_scale)?;
    let reference_error = continuous_error(&target, kind, config)?;

    let mut run_config = RunConfig::new(config.iterations, seed, config.sample_stride);
    run_config.metric = config.metric;
    run_config.pixel_order = config.pixel_order;
    run_config.parallelism = parallelism;
    run_config.schedule = config.schedule;
    let result = run(config.algorithm, &target, scheme, &run_config)?;

    let samples = result.trace.samples;
    let first = samples.first().map_or(f64::NAN, |s| s.error);
    let last = samples.last().map_or(f64::NAN, |s| s.error);
    let peak = target.magnitudes().into_iter().fold(0.0, f64::max);
    let replay = result.state.replay().magnitudes();
    let norm = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let replay_magnitudes = RealGrid::new(
        target.width(),
        target.height(),
        replay.into_iter().map(|v| v * norm).collect(),
    )?;
    Ok(RunRecord {
        run: run_index,
        seed,
        initial_error: first,
        final_error: last,
        reference_error,
        relative_final_error_pct: relative_error_pct(ErrorValue(last), ErrorValue(reference_error))?,
        relative_to_iteration0_pct: relative_error_pct(ErrorValue(last), ErrorValue(first))?,
        accepted: result.trace.summary.accepted,
        samples,
        replay_magnitudes,
    })
}

fn aggregate(label: String, runs: Vec<RunRecord>) -> SchemeAggregate {
    let iterations: Vec<usize> = runs[0].samples.iter().map(|s| s.iteration).collect();
    let (mean, std) = (0..iterations.len())
        .map(|j| mean_std(&runs.iter().map(|r| r.samples[j].error).collect::<Vec<_>>()))
        .unzip();
    let rel: Vec<f64> = runs.iter().map(|r| r.relative_final_error_pct).collect();
    let rel0: Vec<f64> = runs.iter().map(|r| r.relative_to_iteration0_pct).collect();
    let (m, s) = mean_std(&rel);
    SchemeAggregate {
        scheme: label,
        mean_relative_final_error_pct: m,
        std_relative_final_error_pct: s,
        mean_relative_to_iteration0_pct: mean_std(&rel0).0,
        runs,
        iterations,
        mean,
        std,
    }
}

/// Runs every scheme with `runs` seeds and aggregates the traces. Writes nothing.
pub fn compute_convergence(config: &ExperimentConfig) -> Result<AggregateTrace> {
    let magnitudes = load_magnitudes(config)?;
    let jobs: Vec<Job> = (0..config.schemes.len())
        .flat_map(|scheme| (0..config.runs).map(move |run| Job { scheme, run }))
        .collect();
    let inner = inner_parallelism(jobs.len());
    let results = with_workers(config.workers, || {
        map_slice(Parallelism::Parallel, &jobs, |job| {
            let scheme = &config.schemes[job.scheme];
            run_job(config, &magnitudes, scheme, job.run, inner)
                .with_context(|| format!("running {} run {}", scheme.label(), job.run))
        })
    });

    let mut per_scheme: Vec<Vec<RunRecord>> = vec![Vec::new(); config.schemes.len()];
    for (job, result) in jobs.iter().zip(results) {
        per_scheme[job.scheme].push(result?);
    }
    let schemes = config
        .schemes
        .iter()
        .zip(per_scheme)
        .map(|(s, runs)| aggregate(s.label(), runs))
        .collect();
    Ok(AggregateTrace {
        experiment: Experiment::Convergence.as_str(),
        algorithm: config.algorithm.to_string(),
        metric: config.metric.as_str(),
        pixel_order: config.pixel_order.as_str(),
        target_scale: config.target_scale.as_str(),
        width: magnitudes.width(),
        height: magnitudes.height(),
        iterations: config.iterations,
        runs: config.runs,
        base_seed: config.base_seed,
        sample_stride: config.sample_stride,
        schemes,
    })
}

/// Writes per-run traces, the aggregate table, the summary and final replay images.
pub fn write_convergence(config: &ExperimentConfig, trace: &AggregateTrace) -> Result<Artifacts> {
    let mut out = Artifacts::create(&config.output_dir)?;
    for scheme in &trace.schemes {
        let label = slug(&scheme.scheme);
        for run in &scheme.runs {
            let mut csv = Csv::new(&["iteration", "error"]);
            for s in &run.samples {
                csv.row(&[s.iteration], &[s.error]);
            }
            out.csv(&format!("trace_{label}_run{}.csv", run.run), &csv)?;
            out.pgm(&format!("replay_{label}_run{}.pgm", run.run), &run.replay_magnitudes)?;
        }
    }

    let mut header = vec!["iteration".to_string()];
    for scheme in &trace.schemes {
        let label = slug(&scheme.scheme);
        header.push(format!("mean_{label}"));
        header.push(format!("std_{label}"));
    }
    let mut csv = Csv::new(&header);
    if let Some(first) = trace.schemes.first() {
        for (j, &it) in first.iterations.iter().enumerate() {
            let values: Vec<f64> = trace
                .schemes
                .iter()
                .flat_map(|s| [s.mean[j], s.std[j]])
                .collect();
            csv.row(&[it], &values);
        }
    }
    out.csv("aggregate.csv", &csv)?;
    out.json("summary.json", trace)?;
    Ok(out)
}

pub fn run_convergence_experiment(config: &ExperimentConfig) -> Result<(AggregateTrace, Artifacts)> {
    let trace = compute_convergence(config)?;
    let files = write_convergence(config, &trace).context("writing convergence outputs")?;
    Ok((trace, files))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPixel {
    pub index: usize,
    pub x: usize,
    pub y: usize,
    pub base_error: f64,
    pub binary_points: [(f64, f64); 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub experiment: &'static str,
    pub metric: &'static str,
    pub target_scale: &'static str,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub sample_count: usize,
    pub pixels: Vec<SweepPixel>,
    #[serde(skip)]
    pub curves: Vec<SweepCurve>,
}

/// Sweeps the phase or amplitude of seeded random pixels of one target.
pub fn compute_sweep(config: &ExperimentConfig, kind: ModulationKind) -> Result<SweepSummary> {
    let magnitudes = load_magnitudes(config)?;
    let seed = config.base_seed;
    let target = device_target(&magnitudes, seed, kind, config.target_scale)
        .context("building sweep target")?;
    let pixels = sample_pixels(target.width(), target.height(), config.sweep_pixels, seed)?;
    let (lo, hi) = config.amplitude_range;
    let curves = with_workers(config.workers, || {
        map_slice(Parallelism::Parallel, &pixels, |&p| match kind {
            ModulationKind::Phase => phase_sweep(&target, p, config.sample_count, config.metric),
            ModulationKind::Amplitude => {
                amplitude_sweep(&target, p, lo, hi, config.sample_count, config.metric)
            }
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .context("sweeping pixels")?;

    let experiment = match kind {
        ModulationKind::Phase => Experiment::PhaseSweep,
        ModulationKind::Amplitude => Experiment::AmplitudeSweep,
    };
    Ok(SweepSummary {
        experiment: experiment.as_str(),
        metric: config.metric.as_str(),
        target_scale: config.target_scale.as_str(),
        width: target.width(),
        height: target.height(),
        seed,
        sample_count: config.sample_count,
        pixels: curves
            .iter()
            .enumerate()
            .map(|(index, c)| SweepPixel {
                index,
                x: c.pixel.0,
                y: c.pixel.1,
                base_error: c.base_error,
                binary_points: c.binary_points,
            })
            .collect(),
        curves,
    })
}

pub fn write_sweep(
    config: &ExperimentConfig,
    kind: ModulationKind,
    summary: &SweepSummary,
) -> Result<Artifacts> {
    let mut out = Artifacts::create(&config.output_dir)?;
    let (prefix, parameter) = match kind {
        ModulationKind::Phase => ("phase", "phase_offset"),
        ModulationKind::Amplitude => ("amplitude", "amplitude"),
    };
    let mut points = Csv::new(&["pixel", "x", "y", parameter, "delta_error"]);
    for (i, curve) in summary.curves.iter().enumerate() {
        let mut csv = Csv::new(&[parameter, "delta_error"]);
        for (&p, &d) in curve.parameter_values.iter().zip(&curve.delta_errors) {
            csv.row(&[], &[p, d]);
        }
        out.csv(&format!("sweep_{prefix}_pixel{i}.csv"), &csv)?;
        for &(p, d) in &curve.binary_points {
            points.row(&[i, curve.pixel.0, curve.pixel.1], &[p, d]);
        }
    }
    out.csv(&format!("sweep_{prefix}_binary_points.csv"), &points)?;
    out.json(&format!("sweep_{prefix}_summary.json"), summary)?;
    Ok(out)
}

pub fn run_sweep_experiment(
    config: &ExperimentConfig,
    kind: ModulationKind,
) -> Result<(SweepSummary, Artifacts)> {
    let summary = compute_sweep(config, kind)?;
    let files = write_sweep(config, kind, &summary).context("writing sweep outputs")?;
    Ok((summary, files))
}

#[derive(Debug, Clone, Serialize)]
pub struct WinRateRecord {
    pub kind: &'static str,
    #[serde(rename = "L")]
    pub levels: usize,
    pub pixel_count: usize,
    pub win_fraction: f64,
    pub seed: u64,
    pub wins: usize,
    pub multilevel_worse: usize,
    #[serde(skip)]
    pub comparisons: Vec<holoquant::perturb::PixelComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WinRateSummary {
    pub experiment: &'static str,
    pub metric: &'static str,
    pub target_scale: &'static str,
    pub width: usize,
    pub height: usize,
    pub results: Vec<WinRateRecord>,
}

impl WinRateSummary {
    pub fn for_kind(&self, kind: ModulationKind) -> Option<&WinRateRecord> {
        self.results.iter().find(|r| r.kind == kind.as_str())
    }
}

/// Win rate of every multi-level scheme in the config against its binary subset.
pub fn compute_win_rate(config: &ExperimentConfig) -> Result<WinRateSummary> {
    let schemes: Vec<&ModulationScheme> =
        config.schemes.iter().filter(|s| s.level_count() > 2).collect();
    if schemes.is_empty() {
        bail!("win-rate needs at least one scheme with more than 2 levels");
    }
    let magnitudes = load_magnitudes(config)?;
    let seed = config.base_seed;
    let mut results = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let kind = scheme.kind();
        let target = device_target(&magnitudes, seed, kind, config.target_scale)?;
        let rate = with_workers(config.workers, || {
            win_rate(
                &target,
                kind,
                scheme.level_count(),
                config.pixel_count,
                seed,
                config.metric,
                Parallelism::Parallel,
            )
        })
        .with_context(|| format!("computing win rate for {}", scheme.label()))?;
        results.push(WinRateRecord {
            kind: kind.as_str(),
            levels: rate.levels,
            pixel_count: rate.pixel_count(),
            win_fraction: rate.fraction(),
            seed,
            wins: rate.wins(),
            multilevel_worse: rate.multilevel_worse(),
            comparisons: rate.comparisons,
        });
    }
    Ok(WinRateSummary {
        experiment: Experiment::WinRate.as_str(),
        metric: config.metric.as_str(),
        target_scale: config.target_scale.as_str(),
        width: magnitudes.width(),
        height: magnitudes.height(),
        results,
    })
}

pub fn write_win_rate(config: &ExperimentConfig, summary: &WinRateSummary) -> Result<Artifacts> {
    let mut out = Artifacts::create(&config.output_dir)?;
    for r in &summary.results {
        let mut csv = Csv::new(&["x", "y", "multilevel_min", "binary_min"]);
        for c in &r.comparisons {
            csv.row(&[c.pixel.0, c.pixel.1], &[c.multilevel_min, c.binary_min]);
        }
        out.csv(&format!("win_rate_{}-{}.csv", r.kind, r.levels), &csv)?;
    }
    out.json("win_rate.json", summary)?;
    Ok(out)
}

pub fn run_win_rate_experiment(config: &ExperimentConfig) -> Result<(WinRateSummary, Artifacts)> {
    let summary = compute_win_rate(config)?;
    let files = write_win_rate(config, &summary).context("writing win-rate outputs")?;
    Ok((summary, files))
}

/// Runs the configured experiment and returns the files it wrote.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Artifacts> {
    Ok(match config.experiment {
        Experiment::Convergence => run_convergence_experiment(config)?.1,
        Experiment::PhaseSweep => run_sweep_experiment(config, ModulationKind::Phase)?.1,
        Experiment::AmplitudeSweep => run_sweep_experiment(config, ModulationKind::Amplitude)?.1,
        Experiment::WinRate => run_win_rate_experiment(config)?.1,
    })
}
