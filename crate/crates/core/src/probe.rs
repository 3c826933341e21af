//! Exact error of single-pixel hologram changes, evaluated through the rank-1 replay
//! update without touching the cached replay field.
//!
//! For a change `delta` at pixel `(x, y)` every replay sample moves to
//! `R + delta * w`, with `w` the pixel's transform kernel (`|w|^2 = 1 / N`). Its squared
//! modulus is `|R|^2 + 2 Re(conj(R) w delta) + |delta|^2 / N`, so after an `O(N)` prepare
//! step each candidate costs one multiply-add chain and a square root per sample.

use num_complex::Complex64;

use crate::exec::{map_indexed, map_slice, Parallelism};
use crate::field::{ComplexField, Twiddles};
use crate::metrics::Metric;

const LANES: usize = 8;

/// Per-target constants shared by every probe.
#[derive(Debug, Clone)]
pub struct TargetModuli {
    abs: Vec<f64>,
    power: f64,
}

impl TargetModuli {
    pub fn new(target: &ComplexField) -> Self {
        let abs: Vec<f64> = target.values().iter().map(|c| c.norm()).collect();
        let power = abs.iter().map(|a| a * a).sum();
        Self { abs, power }
    }

    pub fn abs(&self) -> &[f64] {
        &self.abs
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Reusable buffers for evaluating candidate values at one pixel.
#[derive(Debug, Clone)]
pub struct PixelProbe {
    kernel: Vec<Complex64>,
    replay_sq: Vec<f64>,
    cross_re: Vec<f64>,
    cross_im: Vec<f64>,
    replay_power: f64,
    cross_sum: Complex64,
    current: Complex64,
    inv_n: f64,
}

impl PixelProbe {
    pub fn new(len: usize) -> Self {
        Self {
            kernel: vec![Complex64::new(0.0, 0.0); len],
            replay_sq: vec![0.0; len],
            cross_re: vec![0.0; len],
            cross_im: vec![0.0; len],
            replay_power: 0.0,
            cross_sum: Complex64::new(0.0, 0.0),
            current: Complex64::new(0.0, 0.0),
            inv_n: 1.0 / len as f64,
        }
    }

    /// Loads the replay field and the pixel `(x, y)` whose present value is `current`.
    pub fn prepare(
        &mut self,
        twiddles: &Twiddles,
        replay: &ComplexField,
        x: usize,
        y: usize,
        current: Complex64,
    ) {
        twiddles.pixel_kernel(x, y, &mut self.kernel);
        let mut power = 0.0;
        let mut cross_sum = Complex64::new(0.0, 0.0);
        for (j, (r, w)) in replay.values().iter().zip(&self.kernel).enumerate() {
            let sq = r.norm_sqr();
            let p = r.conj() * w;
            self.replay_sq[j] = sq;
            // factor 2 folded in
            self.cross_re[j] = 2.0 * p.re;
            self.cross_im[j] = 2.0 * p.im;
            power += sq;
            cross_sum += p;
        }
        self.replay_power = power;
        self.cross_sum = cross_sum;
        self.current = current;
    }

    pub fn current(&self) -> Complex64 {
        self.current
    }

    /// Replay-field contribution of a unit change at the prepared pixel.
    pub fn kernel(&self) -> &[Complex64] {
        &self.kernel
    }

    /// Error after replacing the prepared pixel's value with `value`.
    pub fn error_for(&self, target: &TargetModuli, metric: Metric, value: Complex64) -> f64 {
        let delta = value - self.current;
        let scale = match metric {
            Metric::Eq2 => 1.0,
            Metric::PowerMatched => {
                let new_power = self.replay_power
                    + 2.0 * (self.cross_sum * delta).re
                    + delta.norm_sqr();
                if new_power <= 0.0 {
                    return f64::INFINITY;
                }
                (target.power / new_power).sqrt()
            }
        };
        self.sum_sq_residual(target.abs(), delta, scale) * self.inv_n
    }

    /// `sum_j (t_j - scale * |R_j + delta w_j|)^2`.
    fn sum_sq_residual(&self, target_abs: &[f64], delta: Complex64, scale: f64) -> f64 {
        let (dr, di) = (delta.re, delta.im);
        let offset = delta.norm_sqr() * self.inv_n;
        let n = target_abs.len();
        let body = n - n % LANES;

        let mut acc = [0.0f64; LANES];
        let t_chunks = target_abs[..body].chunks_exact(LANES);
        let a_chunks = self.replay_sq[..body].chunks_exact(LANES);
        let re_chunks = self.cross_re[..body].chunks_exact(LANES);
        let im_chunks = self.cross_im[..body].chunks_exact(LANES);
        for (((t, a), pr), pi) in t_chunks.zip(a_chunks).zip(re_chunks).zip(im_chunks) {
            for l in 0..LANES {
                let q = a[l] + pr[l] * dr - pi[l] * di + offset;
                let d = t[l] - scale * q.max(0.0).sqrt();
                acc[l] += d * d;
            }
        }
        let mut tail = 0.0;
        for j in body..n {
            let q = self.replay_sq[j] + self.cross_re[j] * dr - self.cross_im[j] * di + offset;
            let d = target_abs[j] - scale * q.max(0.0).sqrt();
            tail += d * d;
        }
        acc.iter().sum::<f64>() + tail
    }

    /// Level minimizing the error among all levels except `skip`, by exhaustive
    /// evaluation. Ties go to the lowest index.
    pub fn best_level_exhaustive(
        &self,
        target: &TargetModuli,
        metric: Metric,
        levels: &[Complex64],
        skip: Option<usize>,
        parallelism: Parallelism,
    ) -> Option<(usize, f64)> {
        let errors = map_indexed(parallelism, levels.len(), 16, |k| {
            self.error_for(target, metric, levels[k])
        });
        argmin(errors.into_iter().enumerate(), skip)
    }

    /// Same result as [`best_level_exhaustive`](Self::best_level_exhaustive), computed
    /// by bounding every level's error with a third-order expansion of the replay
    /// moduli and evaluating exactly only the levels whose bounds overlap the best.
    pub fn best_level_screened(
        &self,
        target: &TargetModuli,
        metric: Metric,
        levels: &[Complex64],
        skip: Option<usize>,
        parallelism: Parallelism,
    ) -> Option<(usize, f64)> {
        let max_step = levels
            .iter()
            .map(|&l| (l - self.current).norm())
            .fold(0.0, f64::max);
        let screen = Screen::build(self, target.abs(), max_step);
        let n = target.abs().len() as f64;

        let bounds: Vec<(f64, f64)> = levels
            .iter()
            .map(|&level| {
                let delta = level - self.current;
                let new_power = self.replay_power
                    + 2.0 * (self.cross_sum * delta).re
                    + delta.norm_sqr();
                let approx_sum = screen.approx_modulus_sum(self, target.abs(), delta);
                let slack = screen.remainder(delta.norm());
                let (centre, radius, scale) = match metric {
                    Metric::Eq2 => (
                        (target.power + new_power - 2.0 * approx_sum) / n,
                        2.0 * slack / n,
                        1.0,
                    ),
                    Metric::PowerMatched => {
                        if new_power <= 0.0 {
                            return (f64::NEG_INFINITY, f64::INFINITY);
                        }
                        let s = (target.power / new_power).sqrt();
                        (
                            (2.0 * target.power - 2.0 * s * approx_sum) / n,
                            2.0 * s * slack / n,
                            s,
                        )
                    }
                };
                let rounding = 1e-11
                    * (target.power + scale * scale * new_power + 2.0 * scale * approx_sum.abs())
                    / n;
                (centre, radius + rounding)
            })
            .collect();

        let ceiling = bounds
            .iter()
            .enumerate()
            .filter(|&(k, _)| Some(k) != skip)
            .map(|(_, &(c, r))| c + r)
            .fold(f64::INFINITY, f64::min);
        let shortlist: Vec<usize> = bounds
            .iter()
            .enumerate()
            .filter(|&(k, &(c, r))| Some(k) != skip && c - r <= ceiling)
            .map(|(k, _)| k)
            .collect();
        let exact = map_slice(parallelism, &shortlist, |&k| {
            self.error_for(target, metric, levels[k])
        });
        argmin(shortlist.into_iter().zip(exact), None)
    }

    /// Adds `delta * w` to the replay field.
    pub fn commit(&self, replay: &mut ComplexField, delta: Complex64) {
        for (r, w) in replay.values_mut().iter_mut().zip(&self.kernel) {
            *r += delta * w;
        }
    }
}

fn argmin(errors: impl Iterator<Item = (usize, f64)>, skip: Option<usize>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, e) in errors {
        if Some(k) == skip {
            continue;
        }
        if best.is_none_or(|(bk, b)| e < b || (e == b && k < bk)) {
            best = Some((k, e));
        }
    }
    best
}

/// Samples whose relative modulus change may exceed this are summed exactly.
const EXPANSION_LIMIT: f64 = 0.4;
/// `(5/128) (1 - EXPANSION_LIMIT)^(-7/2)`, rounded up.
const REMAINDER_COEFF: f64 = 0.234;

/// Weighted moments for the expansion
/// `sqrt(a + e) = r (1 + x/2 - x^2/8 + x^3/16 + R)` with `x = e / a`,
/// `|R| <= (5/128) |x|^4 (1 - |x|)^(-7/2)`, where `e = l + c`, `l = cr dr - ci di`
/// and `c = |delta|^2 / N`.
struct Screen {
    exact: Vec<usize>,
    base: f64,
    first: [f64; 3],
    second: [f64; 6],
    third: [f64; 10],
    remainder: f64,
}

impl Screen {
    fn build(probe: &PixelProbe, target_abs: &[f64], max_step: f64) -> Self {
        let inv_n = probe.inv_n;
        let mut s = Screen {
            exact: Vec::new(),
            base: 0.0,
            first: [0.0; 3],
            second: [0.0; 6],
            third: [0.0; 10],
            remainder: 0.0,
        };
        for j in 0..target_abs.len() {
            let t = target_abs[j];
            let a = probe.replay_sq[j];
            let (cr, ci) = (probe.cross_re[j], probe.cross_im[j]);
            let cross = (cr * cr + ci * ci).sqrt();
            let growth = (cross + max_step * inv_n) / a;
            if !(growth * max_step <= EXPANSION_LIMIT) {
                s.exact.push(j);
                continue;
            }
            if t == 0.0 {
                continue;
            }
            let r = a.sqrt();
            let w1 = t / (2.0 * r);
            let w2 = -t / (8.0 * r * a);
            let w3 = t / (16.0 * r * a * a);
            s.base += t * r;
            s.first[0] += w1 * cr;
            s.first[1] += w1 * ci;
            s.first[2] += w1;
            let (rr, ri, ii) = (cr * cr, cr * ci, ci * ci);
            s.second[0] += w2 * rr;
            s.second[1] += w2 * ri;
            s.second[2] += w2 * ii;
            s.second[3] += w2 * cr;
            s.second[4] += w2 * ci;
            s.second[5] += w2;
            s.third[0] += w3 * rr * cr;
            s.third[1] += w3 * rr * ci;
            s.third[2] += w3 * ii * cr;
            s.third[3] += w3 * ii * ci;
            s.third[4] += w3 * rr;
            s.third[5] += w3 * ri;
            s.third[6] += w3 * ii;
            s.third[7] += w3 * cr;
            s.third[8] += w3 * ci;
            s.third[9] += w3;
            let g2 = growth * growth;
            s.remainder += t * r * g2 * g2;
        }
        s.remainder *= REMAINDER_COEFF;
        s
    }

    /// Approximation of `sum_j t_j |R_j + delta w_j|`, exact on the samples excluded
    /// from the expansion.
    fn approx_modulus_sum(&self, probe: &PixelProbe, target_abs: &[f64], delta: Complex64) -> f64 {
        let (dr, di) = (delta.re, delta.im);
        let c = delta.norm_sqr() * probe.inv_n;
        let f = &self.first;
        let q = &self.second;
        let k = &self.third;

        let first = dr * f[0] - di * f[1] + c * f[2];

        let l2 = dr * dr * q[0] - 2.0 * dr * di * q[1] + di * di * q[2];
        let l1 = dr * q[3] - di * q[4];
        let second = l2 + 2.0 * c * l1 + c * c * q[5];

        let l3 = dr * dr * dr * k[0] - 3.0 * dr * dr * di * k[1] + 3.0 * dr * di * di * k[2]
            - di * di * di * k[3];
        let l2 = dr * dr * k[4] - 2.0 * dr * di * k[5] + di * di * k[6];
        let l1 = dr * k[7] - di * k[8];
        let third = l3 + 3.0 * c * l2 + 3.0 * c * c * l1 + c * c * c * k[9];

        let mut exact = 0.0;
        for &j in &self.exact {
            let q = probe.replay_sq[j] + probe.cross_re[j] * dr - probe.cross_im[j] * di + c;
            exact += target_abs[j] * q.max(0.0).sqrt();
        }
        self.base + first + second + third + exact
    }

    /// Bound on the expansion error of the modulus sum for a step of size `step`.
    fn remainder(&self, step: f64) -> f64 {
        let s2 = step * step;
        self.remainder * s2 * s2
    }
}
