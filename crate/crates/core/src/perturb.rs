//! Single-pixel modification experiments on the unquantized starting hologram.
//!
//! Every error change is evaluated exactly through [`PixelProbe`], so a sweep costs
//! one transform plus `O(N)` work per sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{map_slice, Parallelism};
use crate::field::{dft, ComplexField, Twiddles};
use crate::metrics::Metric;
use crate::modulation::{ModulationKind, ModulationScheme};
use crate::probe::{PixelProbe, TargetModuli};
use crate::target::continuous_hologram;

/// Improvements smaller than this are treated as ties.
pub const WIN_THRESHOLD: f64 = 1e-12;

/// Error change as one pixel's phase or amplitude is varied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub pixel: (usize, usize),
    /// Phase offsets in radians, or absolute amplitudes.
    pub parameter_values: Vec<f64>,
    pub delta_errors: Vec<f64>,
    /// `(parameter, delta error)` at the two values a binary device can display.
    pub binary_points: [(f64, f64); 2],
    /// Error of the unmodified hologram.
    pub base_error: f64,
}

/// A starting hologram probed at one pixel.
struct PreparedPixel {
    moduli: TargetModuli,
    probe: PixelProbe,
    current: Complex64,
    base: f64,
}

impl PreparedPixel {
    fn new(
        target: &ComplexField,
        hologram: &ComplexField,
        replay: &ComplexField,
        twiddles: &Twiddles,
        pixel: (usize, usize),
        metric: Metric,
    ) -> Result<Self> {
        let current = hologram.get(pixel.0, pixel.1)?;
        let moduli = TargetModuli::new(target);
        let mut probe = PixelProbe::new(hologram.len());
        probe.prepare(twiddles, replay, pixel.0, pixel.1, current);
        let base = probe.error_for(&moduli, metric, current);
        Ok(Self {
            moduli,
            probe,
            current,
            base,
        })
    }

    fn delta(&self, metric: Metric, value: Complex64) -> f64 {
        self.probe.error_for(&self.moduli, metric, value) - self.base
    }
}

fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|s| {
            if s + 1 == count {
                hi
            } else {
                lo + (hi - lo) * s as f64 / last
            }
        })
        .collect()
}

fn wrap_phase(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Sweeps the phase offset of `pixel` over `sample_count` uniform samples of
/// `[-pi, pi]`, keeping its magnitude. Binary points are the absolute phases 0 and pi,
/// reported at their equivalent offsets.
pub fn phase_sweep(
    target: &ComplexField,
    pixel: (usize, usize),
    sample_count: usize,
    metric: Metric,
) -> Result<SweepCurve> {
    if sample_count < 2 {
        return Err(Error::Config("a sweep needs at least 2 samples".into()));
    }
    let hologram = continuous_hologram(target, ModulationKind::Phase)?;
    hologram.index_of(pixel.0, pixel.1)?;
    let replay = dft(&hologram)?;
    let twiddles = Twiddles::new(hologram.width(), hologram.height());
    let prepared = PreparedPixel::new(target, &hologram, &replay, &twiddles, pixel, metric)?;
    let (m, phi) = prepared.current.to_polar();

    let parameter_values = uniform_grid(-PI, PI, sample_count);
    let delta_errors = parameter_values
        .iter()
        .map(|&offset| prepared.delta(metric, Complex64::from_polar(m, phi + offset)))
        .collect();
    let binary_points = [0.0, PI].map(|absolute| {
        (
            wrap_phase(absolute - phi),
            prepared.delta(metric, Complex64::from_polar(m, absolute)),
        )
    });
    Ok(SweepCurve {
        pixel,
        parameter_values,
        delta_errors,
        binary_points,
        base_error: prepared.base,
    })
}

/// Sweeps the amplitude of `pixel` over `sample_count` uniform samples of `[lo, hi]`.
/// Binary points are the amplitudes 0 and 1.
pub fn amplitude_sweep(
    target: &ComplexField,
    pixel: (usize, usize),
    lo: f64,
    hi: f64,
    sample_count: usize,
    metric: Metric,
) -> Result<SweepCurve> {
    if sample_count < 2 {
        return Err(Error::Config("a sweep needs at least 2 samples".into()));
    }
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Config(format!(
            "amplitude range must satisfy 0 <= lo < hi (got {lo}, {hi})"
        )));
    }
    let hologram = continuous_hologram(target, ModulationKind::Amplitude)?;
    hologram.index_of(pixel.0, pixel.1)?;
    let replay = dft(&hologram)?;
    let twiddles = Twiddles::new(hologram.width(), hologram.height());
    let prepared = PreparedPixel::new(target, &hologram, &replay, &twiddles, pixel, metric)?;

    let parameter_values = uniform_grid(lo, hi, sample_count);
    let delta_errors = parameter_values
        .iter()
        .map(|&a| prepared.delta(metric, Complex64::new(a, 0.0)))
        .collect();
    let binary_points =
        [0.0, 1.0].map(|a| (a, prepared.delta(metric, Complex64::new(a, 0.0))));
    Ok(SweepCurve {
        pixel,
        parameter_values,
        delta_errors,
        binary_points,
        base_error: prepared.base,
    })
}

/// `count` distinct pixels drawn uniformly (ChaCha8, `seed_from_u64(seed)`), as `(x, y)`.
pub fn sample_pixels(
    width: usize,
    height: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let n = width * height;
    if count > n {
        return Err(Error::Config(format!(
            "cannot sample {count} distinct pixels from {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n, count)
        .into_iter()
        .map(|i| (i % width, i / width))
        .collect())
}

/// Best achievable error change at one pixel on the multi-level and binary devices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelComparison {
    pub pixel: (usize, usize),
    pub multilevel_min: f64,
    pub binary_min: f64,
}

impl PixelComparison {
    pub fn multilevel_wins(&self) -> bool {
        self.multilevel_min < self.binary_min - WIN_THRESHOLD
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinRate {
    pub kind: ModulationKind,
    pub levels: usize,
    pub seed: u64,
    pub comparisons: Vec<PixelComparison>,
}

impl WinRate {
    pub fn pixel_count(&self) -> usize {
        self.comparisons.len()
    }

    pub fn wins(&self) -> usize {
        self.comparisons.iter().filter(|c| c.multilevel_wins()).count()
    }

    /// Pixels where the multi-level device is strictly worse than binary.
    pub fn multilevel_worse(&self) -> usize {
        self.comparisons
            .iter()
            .filter(|c| c.multilevel_min > c.binary_min)
            .count()
    }

    pub fn fraction(&self) -> f64 {
        self.wins() as f64 / self.comparisons.len() as f64
    }
}

/// Fraction of sampled pixels where the best of `multilevel` levels beats the best
/// binary level by more than [`WIN_THRESHOLD`]. Phase levels keep the pixel's
/// starting magnitude.
pub fn win_rate(
    target: &ComplexField,
    kind: ModulationKind,
    multilevel: usize,
    pixel_count: usize,
    seed: u64,
    metric: Metric,
    parallelism: Parallelism,
) -> Result<WinRate> {
    if multilevel <= 2 {
        return Err(Error::Config(format!(
            "multi-level count must exceed 2 (got {multilevel})"
        )));
    }
    if pixel_count == 0 {
        return Err(Error::Config("pixel count must be at least 1".into()));
    }
    let multi = ModulationScheme::new(kind, multilevel)?;
    let binary = multi.binary();
    let hologram = continuous_hologram(target, kind)?;
    let replay = dft(&hologram)?;
    let twiddles = Twiddles::new(hologram.width(), hologram.height());
    let pixels = sample_pixels(hologram.width(), hologram.height(), pixel_count, seed)?;

    let comparisons = map_slice(parallelism, &pixels, |&pixel| {
        let prepared = PreparedPixel::new(target, &hologram, &replay, &twiddles, pixel, metric)
            .expect("sampled pixel is in bounds");
        let scale = match kind {
            ModulationKind::Phase => prepared.current.norm(),
            ModulationKind::Amplitude => 1.0,
        };
        let scaled = |levels: &[Complex64]| -> Vec<Complex64> {
            levels.iter().map(|&l| l * scale).collect()
        };
        let best = |levels: &[Complex64], screened: bool| {
            let found = if screened {
                prepared.probe.best_level_screened(
                    &prepared.moduli,
                    metric,
                    levels,
                    None,
                    Parallelism::Sequential,
                )
            } else {
                prepared.probe.best_level_exhaustive(
                    &prepared.moduli,
                    metric,
                    levels,
                    None,
                    Parallelism::Sequential,
                )
            };
            found.map_or(f64::INFINITY, |(_, e)| e) - prepared.base
        };
        PixelComparison {
            pixel,
            multilevel_min: best(&scaled(multi.levels()), true),
            binary_min: best(&scaled(binary.levels()), false),
        }
    });
    Ok(WinRate {
        kind,
        levels: multilevel,
        seed,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_half_open_range() {
        assert_eq!(wrap_phase(PI), -PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_phase(0.25), 0.25);
    }

    #[test]
    fn grid_hits_endpoints() {
        let g = uniform_grid(-PI, PI, 5);
        assert_eq!(g[0], -PI);
        assert_eq!(g[4], PI);
        assert_eq!(g[2], 0.0);
    }

    #[test]
    fn too_many_pixels() {
        assert!(sample_pixels(2, 2, 5, 0).is_err());
        let all = sample_pixels(2, 2, 4, 0).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }
}
