//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use holoquant::{
    build_target, load_grayscale, random_phase, symmetrize_180, Complex64, ComplexField, Metric,
    RealGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct double sum with the symmetric normalization; `sign` is -1 forward, +1 inverse.
pub fn naive_dft(f: &ComplexField, sign: f64) -> ComplexField {
    let (w, h) = (f.width(), f.height());
    let scale = 1.0 / ((w * h) as f64).sqrt();
    ComplexField::from_fn(w, h, |u, v| {
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let angle = sign
                    * 2.0
                    * PI
                    * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                acc += f.values()[y * w + x] * Complex64::from_polar(1.0, angle);
            }
        }
        acc * scale
    })
    .unwrap()
}

/// Phase-insensitive MSE straight from its definition.
pub fn naive_eq2(target: &ComplexField, replay: &ComplexField) -> f64 {
    target
        .values()
        .iter()
        .zip(replay.values())
        .map(|(t, r)| (t.norm() - r.norm()).powi(2))
        .sum::<f64>()
        / target.len() as f64
}

/// Power-matched MSE straight from its definition.
pub fn naive_power(target: &ComplexField, replay: &ComplexField) -> f64 {
    let pt: f64 = target.values().iter().map(|c| c.norm_sqr()).sum();
    let pr: f64 = replay.values().iter().map(|c| c.norm_sqr()).sum();
    let s = (pt / pr).sqrt();
    target
        .values()
        .iter()
        .zip(replay.values())
        .map(|(t, r)| (t.norm() - s * r.norm()).powi(2))
        .sum::<f64>()
        / target.len() as f64
}

pub fn naive_metric(metric: Metric, target: &ComplexField, replay: &ComplexField) -> f64 {
    match metric {
        Metric::Eq2 => naive_eq2(target, replay),
        Metric::PowerMatched => naive_power(target, replay),
    }
}

pub fn random_field(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ComplexField {
    ComplexField::from_fn(w, h, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../assets")
        .join(name)
}

/// Symmetrized test image of the given size (16, 64 or 128).
pub fn camera(size: usize) -> RealGrid {
    symmetrize_180(&load_grayscale(asset(&format!("camera_{size}.pgm"))).unwrap())
}

/// Random-phase target with uniformly random magnitudes.
pub fn random_target(seed: u64, w: usize, h: usize) -> ComplexField {
    let mut r = rng(seed ^ 0x5eed);
    let mags = RealGrid::new(w, h, (0..w * h).map(|_| r.gen_range(0.0..1.0)).collect()).unwrap();
    build_target(&mags, &random_phase(w, h, seed).unwrap()).unwrap()
}
