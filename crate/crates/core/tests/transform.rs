mod common;

use common::{naive_dft, random_field, rng};
use holoquant::{apply_pixel_delta, dft, idft, total_power, Complex64, ComplexField};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn fft_matches_direct_summation() {
    let mut r = rng(1);
    for (w, h) in [(1, 1), (2, 2), (3, 5), (4, 4), (6, 3), (8, 8), (7, 2)] {
        let f = random_field(&mut r, w, h);
        let fast = dft(&f).unwrap();
        let slow = naive_dft(&f, -1.0);
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-12, "{w}x{h} forward");
        let fast = idft(&f).unwrap();
        let slow = naive_dft(&f, 1.0);
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-12, "{w}x{h} inverse");
    }
}

#[test]
fn real_fields_give_conjugate_symmetric_replay() {
    let mut r = rng(2);
    for (w, h) in [(4, 4), (6, 8), (5, 3)] {
        let vals: Vec<f64> = (0..w * h).map(|_| r.gen_range(0.0..1.0)).collect();
        let f = ComplexField::from_real(w, h, &vals).unwrap();
        let g = dft(&f).unwrap();
        for v in 0..h {
            for u in 0..w {
                let a = g.get(u, v).unwrap();
                let b = g.get((w - u) % w, (h - v) % h).unwrap();
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn rank_one_update_is_exhaustively_exact() {
    let mut r = rng(3);
    for (w, h) in [(4, 4), (3, 5)] {
        let f = random_field(&mut r, w, h);
        let replay = dft(&f).unwrap();
        for y in 0..h {
            for x in 0..w {
                let delta = Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
                let mut g = f.clone();
                g.set(x, y, g.get(x, y).unwrap() + delta).unwrap();
                let updated = apply_pixel_delta(&replay, x, y, delta).unwrap();
                assert!(updated.max_abs_diff(&dft(&g).unwrap()).unwrap() < 1e-12);
            }
        }
    }
}

#[test]
fn pixel_delta_rejects_out_of_bounds() {
    let replay = ComplexField::zeros(2, 2).unwrap();
    assert!(apply_pixel_delta(&replay, 2, 0, Complex64::new(1.0, 0.0)).is_err());
    assert!(apply_pixel_delta(&replay, 0, 2, Complex64::new(1.0, 0.0)).is_err());
}

fn field_strategy() -> impl Strategy<Value = ComplexField> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), w * h).prop_map(move |v| {
            ComplexField::new(w, h, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn round_trip_and_parseval(f in field_strategy()) {
        let g = dft(&f).unwrap();
        prop_assert!(idft(&g).unwrap().max_abs_diff(&f).unwrap() < 1e-10);
        let (pf, pg) = (total_power(&f), total_power(&g));
        prop_assert!((pf - pg).abs() <= 1e-9 * pf.max(1e-300));
    }

    #[test]
    fn transform_is_linear(f in field_strategy(), a in -3.0f64..3.0) {
        let lhs = dft(&f.scaled(a)).unwrap();
        let rhs = dft(&f).unwrap().scaled(a);
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn rank_one_matches_retransform(
        f in field_strategy(),
        px in 0usize..12,
        py in 0usize..12,
        dre in -2.0f64..2.0,
        dim in -2.0f64..2.0,
    ) {
        let (x, y) = (px % f.width(), py % f.height());
        let delta = Complex64::new(dre, dim);
        let mut g = f.clone();
        g.set(x, y, g.get(x, y).unwrap() + delta).unwrap();
        let updated = apply_pixel_delta(&dft(&f).unwrap(), x, y, delta).unwrap();
        prop_assert!(updated.max_abs_diff(&dft(&g).unwrap()).unwrap() < 1e-10);
    }
}
