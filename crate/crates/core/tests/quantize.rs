mod common;

use common::rng;
use holoquant::{quantize_field, quantize_nearest, Complex64, ComplexField, ModulationScheme};
use proptest::prelude::*;
use rand::Rng;

/// First index of the closest level.
fn brute_nearest(value: Complex64, scheme: &ModulationScheme) -> usize {
    let mut best = 0;
    for (k, &l) in scheme.levels().iter().enumerate() {
        if (value - l).norm_sqr() < (value - scheme.levels()[best]).norm_sqr() {
            best = k;
        }
    }
    best
}

fn schemes() -> Vec<ModulationScheme> {
    vec![
        ModulationScheme::phase(2).unwrap(),
        ModulationScheme::phase(3).unwrap(),
        ModulationScheme::phase(4).unwrap(),
        ModulationScheme::phase(256).unwrap(),
        ModulationScheme::amplitude(2).unwrap(),
        ModulationScheme::amplitude(5).unwrap(),
        ModulationScheme::amplitude(256).unwrap(),
    ]
}

#[test]
fn matches_brute_force_on_random_values() {
    let mut r = rng(7);
    for scheme in schemes() {
        for _ in 0..5000 {
            let v = Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
            let k = brute_nearest(v, &scheme);
            assert_eq!(scheme.nearest_index(v), k, "{scheme} at {v}");
            let q = quantize_nearest(v, &scheme);
            assert_eq!(q, scheme.level(k));
            assert_eq!(quantize_nearest(q, &scheme), q);
        }
    }
}

#[test]
fn boundary_values() {
    let phase2 = ModulationScheme::phase(2).unwrap();
    // Equidistant from 1 and -1: lower index wins.
    assert_eq!(phase2.nearest_index(Complex64::new(0.0, 1.0)), 0);
    assert_eq!(phase2.nearest_index(Complex64::new(0.0, 0.0)), 0);
    let amp2 = ModulationScheme::amplitude(2).unwrap();
    assert_eq!(amp2.nearest_index(Complex64::new(0.5, 0.0)), 0);
    assert_eq!(amp2.nearest_index(Complex64::new(-3.0, 1.0)), 0);
    assert_eq!(amp2.nearest_index(Complex64::new(7.0, -1.0)), 1);
    let phase4 = ModulationScheme::phase(4).unwrap();
    assert_eq!(phase4.level(1), Complex64::new(0.0, 1.0));
    assert_eq!(phase4.level(2), Complex64::new(-1.0, 0.0));
}

#[test]
fn field_quantization_lands_on_levels() {
    let mut r = rng(8);
    let scheme = ModulationScheme::phase(8).unwrap();
    let f = ComplexField::from_fn(5, 4, |_, _| {
        Complex64::from_polar(r.gen_range(0.1..2.0), r.gen_range(-4.0..4.0))
    })
    .unwrap();
    let q = quantize_field(&f, &scheme);
    assert!(q.values().iter().all(|&v| scheme.contains(v)));
    assert_eq!(quantize_field(&q, &scheme), q);
}

proptest! {
    #[test]
    fn nearest_is_optimal(re in -3.0f64..3.0, im in -3.0f64..3.0, which in 0usize..7) {
        let scheme = &schemes()[which];
        let v = Complex64::new(re, im);
        prop_assert_eq!(scheme.nearest_index(v), brute_nearest(v, scheme));
    }

    #[test]
    fn levels_map_to_themselves(l in 2usize..300, k in 0usize..300, phase in any::<bool>()) {
        let scheme = if phase {
            ModulationScheme::phase(l).unwrap()
        } else {
            ModulationScheme::amplitude(l).unwrap()
        };
        let k = k % l;
        prop_assert_eq!(scheme.index_of(scheme.level(k)), Some(k));
    }
}
