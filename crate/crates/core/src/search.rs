//! Quantization-constrained hologram search.
//!
//! Three single-pixel algorithms share one incrementally maintained state:
//!
//! * best-value direct search: the visited pixel is set to whichever level of the
//!   scheme gives the lowest error;
//! * direct search: one random alternative level, kept only on strict improvement;
//! * simulated annealing: one random alternative level, Metropolis acceptance under
//!   geometric cooling, best state retained.
//!
//! Pixel choices come from ChaCha8 seeded with `seed_from_u64(seed)` on stream 1;
//! annealing acceptance draws use stream 2 so that the pixel/level sequence is the
//! same as for direct search with the same seed.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::field::{dft, ComplexField, Twiddles};
use crate::metrics::{ErrorValue, Metric};
use crate::modulation::ModulationScheme;
use crate::probe::{PixelProbe, TargetModuli};
use crate::target::initial_hologram;

/// Accepted changes between full recomputations of the cached replay field.
pub const REFRESH_INTERVAL: usize = 10_000;

/// Below this many levels exhaustive evaluation is cheaper than screening.
const SCREENING_MIN_LEVELS: usize = 16;

const PIXEL_STREAM: u64 = 1;
const ACCEPT_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    BestValueDs,
    DirectSearch,
    SimulatedAnnealing,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::BestValueDs => "best-value-ds",
            Algorithm::DirectSearch => "direct-search",
            Algorithm::SimulatedAnnealing => "simulated-annealing",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "best-value-ds" | "best-value" | "bvds" => Ok(Algorithm::BestValueDs),
            "direct-search" | "ds" => Ok(Algorithm::DirectSearch),
            "simulated-annealing" | "sa" => Ok(Algorithm::SimulatedAnnealing),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PixelOrder {
    #[default]
    Random,
    /// Row-major sweep, wrapping around.
    Raster,
}

impl PixelOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            PixelOrder::Random => "random",
            PixelOrder::Raster => "raster",
        }
    }
}

impl FromStr for PixelOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(PixelOrder::Random),
            "raster" => Ok(PixelOrder::Raster),
            other => Err(Error::Config(format!("unknown pixel order '{other}'"))),
        }
    }
}

/// Annealing temperatures. `None` selects the defaults: the initial error for
/// `t_initial` and `1e-6` times the initial error for `t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Schedule {
    pub t_initial: Option<f64>,
    pub t_final: Option<f64>,
}

impl Schedule {
    pub fn fixed(t_initial: f64, t_final: f64) -> Self {
        Self {
            t_initial: Some(t_initial),
            t_final: Some(t_final),
        }
    }

    fn resolve(&self, initial_error: f64) -> Result<(f64, f64)> {
        let t0 = self.t_initial.unwrap_or(initial_error);
        let t1 = self.t_final.unwrap_or(1e-6 * t0);
        if !(t1 > 0.0 && t0 >= t1 && t0.is_finite()) {
            return Err(Error::Config(format!(
                "annealing temperatures must satisfy t_initial >= t_final > 0 (got {t0}, {t1})"
            )));
        }
        Ok((t0, t1))
    }
}

/// Parameters shared by all run loops.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub iterations: usize,
    pub seed: u64,
    pub sample_stride: usize,
    pub metric: Metric,
    pub pixel_order: PixelOrder,
    pub parallelism: Parallelism,
    pub schedule: Schedule,
}

impl RunConfig {
    pub fn new(iterations: usize, seed: u64, sample_stride: usize) -> Self {
        Self {
            iterations,
            seed,
            sample_stride,
            metric: Metric::Eq2,
            pixel_order: PixelOrder::Random,
            parallelism: Parallelism::Parallel,
            schedule: Schedule::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.sample_stride == 0 {
            return Err(Error::Config("sample stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub iteration: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub initial_error: f64,
    pub final_error: f64,
    pub iterations: usize,
    pub accepted: usize,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub algorithm: Algorithm,
    pub scheme: ModulationScheme,
    pub seed: u64,
    pub samples: Vec<TraceSample>,
    pub summary: RunSummary,
}

impl ConvergenceTrace {
    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.error)
    }
}

/// A finished run: its trace and the final search state.
#[derive(Debug, Clone)]
pub struct SearchRun {
    pub trace: ConvergenceTrace,
    pub state: SearchState,
}

/// Constrained hologram together with its cached replay field and error.
#[derive(Debug, Clone)]
pub struct SearchState {
    target: ComplexField,
    moduli: TargetModuli,
    scheme: ModulationScheme,
    metric: Metric,
    hologram: ComplexField,
    indices: Vec<usize>,
    replay: ComplexField,
    error: f64,
    twiddles: Twiddles,
    probe: PixelProbe,
    since_refresh: usize,
    screening: bool,
}

impl SearchState {
    /// State at the quantized initial hologram.
    pub fn new(target: &ComplexField, scheme: &ModulationScheme, metric: Metric) -> Result<Self> {
        let hologram = initial_hologram(target, scheme)?;
        Self::from_hologram(target, scheme, hologram, metric)
    }

    /// State at a caller-supplied hologram, which must lie on the scheme's levels.
    pub fn from_hologram(
        target: &ComplexField,
        scheme: &ModulationScheme,
        hologram: ComplexField,
        metric: Metric,
    ) -> Result<Self> {
        target.same_shape(&hologram)?;
        let indices = hologram
            .values()
            .iter()
            .map(|&v| scheme.index_of(v).ok_or(Error::NotOnLevelSet))
            .collect::<Result<Vec<_>>>()?;
        let replay = dft(&hologram)?;
        let error = metric.evaluate(target, &replay)?.0;
        Ok(Self {
            moduli: TargetModuli::new(target),
            target: target.clone(),
            scheme: scheme.clone(),
            metric,
            twiddles: Twiddles::new(hologram.width(), hologram.height()),
            probe: PixelProbe::new(hologram.len()),
            hologram,
            indices,
            replay,
            error,
            since_refresh: 0,
            screening: true,
        })
    }

    pub fn target(&self) -> &ComplexField {
        &self.target
    }

    pub fn scheme(&self) -> &ModulationScheme {
        &self.scheme
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn hologram(&self) -> &ComplexField {
        &self.hologram
    }

    /// Level index of every hologram pixel, row-major.
    pub fn level_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn replay(&self) -> &ComplexField {
        &self.replay
    }

    pub fn error(&self) -> ErrorValue {
        ErrorValue(self.error)
    }

    /// Largest deviation between the cached replay and a fresh transform.
    pub fn coherence_error(&self) -> Result<f64> {
        dft(&self.hologram)?.max_abs_diff(&self.replay)
    }

    /// Recomputes the replay field and the error from the hologram.
    pub fn refresh(&mut self) -> Result<()> {
        self.replay = dft(&self.hologram)?;
        self.error = self.metric.evaluate(&self.target, &self.replay)?.0;
        self.since_refresh = 0;
        Ok(())
    }

    /// Error the replay would have with pixel `(x, y)` set to `level`.
    pub fn candidate_error(&self, x: usize, y: usize, level: Complex64) -> Result<ErrorValue> {
        let i = self.hologram.index_of(x, y)?;
        if !self.scheme.contains(level) {
            return Err(Error::NotOnLevelSet);
        }
        let mut probe = PixelProbe::new(self.hologram.len());
        probe.prepare(&self.twiddles, &self.replay, x, y, self.hologram.values()[i]);
        Ok(ErrorValue(probe.error_for(&self.moduli, self.metric, level)))
    }

    /// Errors of every level at pixel `(x, y)`, in level order.
    pub fn level_errors(&mut self, x: usize, y: usize, parallelism: Parallelism) -> Result<Vec<f64>> {
        let i = self.hologram.index_of(x, y)?;
        self.prepare_probe(i);
        Ok(self.evaluate_levels(parallelism))
    }

    /// Sets pixel `(x, y)` to its error-minimizing level. Returns `true` if the pixel
    /// changed. The error never increases.
    pub fn best_value_step(&mut self, x: usize, y: usize, parallelism: Parallelism) -> Result<bool> {
        let i = self.hologram.index_of(x, y)?;
        Ok(self.best_value_step_at(i, parallelism))
    }

    /// Sets pixel `(x, y)` to level `k` if that strictly lowers the error.
    pub fn try_level(&mut self, x: usize, y: usize, k: usize) -> Result<bool> {
        let i = self.hologram.index_of(x, y)?;
        if k >= self.scheme.level_count() {
            return Err(Error::NotOnLevelSet);
        }
        self.prepare_probe(i);
        let e = self.probe.error_for(&self.moduli, self.metric, self.scheme.level(k));
        if e < self.error {
            self.commit(i, k, e)?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Sets pixel `(x, y)` to level `k` unconditionally and returns the new error.
    pub fn set_level(&mut self, x: usize, y: usize, k: usize) -> Result<ErrorValue> {
        let i = self.hologram.index_of(x, y)?;
        if k >= self.scheme.level_count() {
            return Err(Error::NotOnLevelSet);
        }
        self.prepare_probe(i);
        let e = self.probe.error_for(&self.moduli, self.metric, self.scheme.level(k));
        self.commit(i, k, e)?;
        Ok(ErrorValue(self.error))
    }

    fn prepare_probe(&mut self, i: usize) {
        let w = self.hologram.width();
        self.probe.prepare(
            &self.twiddles,
            &self.replay,
            i % w,
            i / w,
            self.hologram.values()[i],
        );
    }

    fn evaluate_levels(&self, parallelism: Parallelism) -> Vec<f64> {
        let levels = self.scheme.levels();
        map_indexed(parallelism, levels.len(), 16, |k| {
            self.probe.error_for(&self.moduli, self.metric, levels[k])
        })
    }

    fn best_value_step_at(&mut self, i: usize, parallelism: Parallelism) -> bool {
        self.prepare_probe(i);
        let skip = Some(self.indices[i]);
        let levels = self.scheme.levels();
        let best = if self.screening && levels.len() > SCREENING_MIN_LEVELS {
            self.probe
                .best_level_screened(&self.moduli, self.metric, levels, skip, parallelism)
        } else {
            self.probe
                .best_level_exhaustive(&self.moduli, self.metric, levels, skip, parallelism)
        };
        match best {
            Some((k, e)) if e < self.error => {
                self.commit(i, k, e).expect("replay refresh on a valid field");
                true
            }
            _ => false,
        }
    }

    /// Chooses between bounded screening (default) and exhaustive evaluation for
    /// best-value steps. Both select the same level.
    pub fn set_screening(&mut self, on: bool) {
        self.screening = on;
    }

    fn commit(&mut self, i: usize, k: usize, new_error: f64) -> Result<()> {
        let level = self.scheme.level(k);
        let delta = level - self.hologram.values()[i];
        self.probe.commit(&mut self.replay, delta);
        self.hologram.values_mut()[i] = level;
        self.indices[i] = k;
        self.error = new_error;
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh()?;
        }
        Ok(())
    }

    fn set_indices(&mut self, indices: &[usize]) -> Result<()> {
        for (i, &k) in indices.iter().enumerate() {
            self.indices[i] = k;
            self.hologram.values_mut()[i] = self.scheme.level(k);
        }
        self.refresh()
    }
}

struct Sampler {
    stride: usize,
    samples: Vec<TraceSample>,
}

impl Sampler {
    fn new(stride: usize, initial: f64) -> Self {
        Self {
            stride,
            samples: vec![TraceSample {
                iteration: 0,
                error: initial,
            }],
        }
    }

    fn record(&mut self, iteration: usize, last: usize, error: f64) {
        if iteration.is_multiple_of(self.stride) || iteration == last {
            self.samples.push(TraceSample { iteration, error });
        }
    }
}

fn pixel_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PIXEL_STREAM);
    rng
}

fn next_pixel(order: PixelOrder, rng: &mut ChaCha8Rng, iteration: usize, n: usize) -> usize {
    match order {
        PixelOrder::Random => rng.gen_range(0..n),
        PixelOrder::Raster => iteration % n,
    }
}

/// Uniform level index different from `current`.
fn alternative_level(rng: &mut ChaCha8Rng, current: usize, count: usize) -> usize {
    let k = rng.gen_range(0..count - 1);
    if k >= current {
        k + 1
    } else {
        k
    }
}

fn finish(
    algorithm: Algorithm,
    scheme: &ModulationScheme,
    config: &RunConfig,
    sampler: Sampler,
    initial_error: f64,
    accepted: usize,
    started: Instant,
    state: SearchState,
) -> SearchRun {
    let final_error = sampler.samples.last().map_or(initial_error, |s| s.error);
    SearchRun {
        trace: ConvergenceTrace {
            algorithm,
            scheme: scheme.clone(),
            seed: config.seed,
            samples: sampler.samples,
            summary: RunSummary {
                initial_error,
                final_error,
                iterations: config.iterations,
                accepted,
                elapsed_secs: started.elapsed().as_secs_f64(),
            },
        },
        state,
    }
}

/// Best-value direct search from the quantized initial hologram.
pub fn run_best_value_ds(
    target: &ComplexField,
    scheme: &ModulationScheme,
    config: &RunConfig,
) -> Result<SearchRun> {
    config.validate()?;
    let started = Instant::now();
    let mut state = SearchState::new(target, scheme, config.metric)?;
    let initial = state.error;
    let mut sampler = Sampler::new(config.sample_stride, initial);
    let mut rng = pixel_rng(config.seed);
    let n = state.hologram.len();
    let mut accepted = 0;
    for it in 0..config.iterations {
        let i = next_pixel(config.pixel_order, &mut rng, it, n);
        if state.best_value_step_at(i, config.parallelism) {
            accepted += 1;
        }
        sampler.record(it + 1, config.iterations, state.error);
    }
    Ok(finish(
        Algorithm::BestValueDs,
        scheme,
        config,
        sampler,
        initial,
        accepted,
        started,
        state,
    ))
}

/// Classic direct search: one random alternative level per iteration, accepted on
/// strict improvement.
pub fn run_direct_search(
    target: &ComplexField,
    scheme: &ModulationScheme,
    config: &RunConfig,
) -> Result<SearchRun> {
    config.validate()?;
    let started = Instant::now();
    let mut state = SearchState::new(target, scheme, config.metric)?;
    let initial = state.error;
    let mut sampler = Sampler::new(config.sample_stride, initial);
    let mut rng = pixel_rng(config.seed);
    let n = state.hologram.len();
    let l = scheme.level_count();
    let mut accepted = 0;
    for it in 0..config.iterations {
        let i = next_pixel(config.pixel_order, &mut rng, it, n);
        let k = alternative_level(&mut rng, state.indices[i], l);
        state.prepare_probe(i);
        let e = state.probe.error_for(&state.moduli, state.metric, scheme.level(k));
        if e < state.error {
            state.commit(i, k, e)?;
            accepted += 1;
        }
        sampler.record(it + 1, config.iterations, state.error);
    }
    Ok(finish(
        Algorithm::DirectSearch,
        scheme,
        config,
        sampler,
        initial,
        accepted,
        started,
        state,
    ))
}

/// Simulated annealing with geometric cooling
/// `T_k = t_initial (t_final / t_initial)^(k / iterations)`. The trace records the
/// best error seen so far and the returned state is the best state visited.
pub fn run_simulated_annealing(
    target: &ComplexField,
    scheme: &ModulationScheme,
    config: &RunConfig,
) -> Result<SearchRun> {
    config.validate()?;
    let started = Instant::now();
    let mut state = SearchState::new(target, scheme, config.metric)?;
    let initial = state.error;
    let (t0, t1) = config.schedule.resolve(initial)?;
    let mut sampler = Sampler::new(config.sample_stride, initial);
    let mut rng = pixel_rng(config.seed);
    let mut accept_rng = ChaCha8Rng::seed_from_u64(config.seed);
    accept_rng.set_stream(ACCEPT_STREAM);

    let n = state.hologram.len();
    let l = scheme.level_count();
    let ratio = t1 / t0;
    let mut best_error = initial;
    let mut best_indices = state.indices.clone();
    let mut accepted = 0;
    for it in 0..config.iterations {
        let temperature = t0 * ratio.powf(it as f64 / config.iterations as f64);
        let i = next_pixel(config.pixel_order, &mut rng, it, n);
        let k = alternative_level(&mut rng, state.indices[i], l);
        state.prepare_probe(i);
        let e = state.probe.error_for(&state.moduli, state.metric, scheme.level(k));
        let rise = e - state.error;
        let take = rise <= 0.0 || accept_rng.gen::<f64>() < (-rise / temperature).exp();
        if take {
            state.commit(i, k, e)?;
            accepted += 1;
            if state.error < best_error {
                best_error = state.error;
                best_indices.copy_from_slice(&state.indices);
            }
        }
        sampler.record(it + 1, config.iterations, best_error);
    }
    if state.indices != best_indices {
        state.set_indices(&best_indices)?;
    }
    Ok(finish(
        Algorithm::SimulatedAnnealing,
        scheme,
        config,
        sampler,
        initial,
        accepted,
        started,
        state,
    ))
}

/// Dispatches to the run loop for `algorithm`.
pub fn run(
    algorithm: Algorithm,
    target: &ComplexField,
    scheme: &ModulationScheme,
    config: &RunConfig,
) -> Result<SearchRun> {
    match algorithm {
        Algorithm::BestValueDs => run_best_value_ds(target, scheme, config),
        Algorithm::DirectSearch => run_direct_search(target, scheme, config),
        Algorithm::SimulatedAnnealing => run_simulated_annealing(target, scheme, config),
    }
}
