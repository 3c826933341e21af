mod common;

use std::fs;

use common::camera;
use holoquant::target::{continuous_hologram, encode_pgm, is_symmetric_180, write_pgm};
use holoquant::{
    build_target, device_scaled_target, dft, idft, initial_hologram, load_grayscale,
    random_phase, symmetrize_180, total_power, Error, ModulationKind, ModulationScheme, RealGrid,
};
use proptest::prelude::*;

#[test]
fn loads_tiny_pgm_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.pgm");
    let bytes = [b"P5\n2 2\n255\n".as_slice(), &[0, 255, 128, 64]].concat();
    fs::write(&path, &bytes).unwrap();
    let g = load_grayscale(&path).unwrap();
    assert_eq!((g.width(), g.height()), (2, 2));
    assert_eq!(g.data(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    assert_eq!(encode_pgm(&g), bytes);

    let copy = dir.path().join("copy.pgm");
    write_pgm(&copy, &g).unwrap();
    assert_eq!(fs::read(&copy).unwrap(), bytes);
}

#[test]
fn loads_png() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.png");
    image::GrayImage::from_raw(3, 1, vec![0, 51, 255])
        .unwrap()
        .save(&path)
        .unwrap();
    let g = load_grayscale(&path).unwrap();
    assert_eq!(g.data(), &[0.0, 0.2, 1.0]);
}

#[test]
fn load_errors_are_specific() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_grayscale(dir.path().join("absent.pgm")),
        Err(Error::MissingFile(_))
    ));

    let rgb = dir.path().join("rgb.png");
    image::RgbImage::from_raw(1, 1, vec![1, 2, 3]).unwrap().save(&rgb).unwrap();
    assert!(matches!(load_grayscale(&rgb), Err(Error::NotGrayscale { .. })));

    let gif = dir.path().join("x.gif");
    fs::write(&gif, b"GIF89a\x01\x00\x01\x00\x00\x00\x00;").unwrap();
    assert!(matches!(load_grayscale(&gif), Err(Error::UnsupportedFormat { .. })));

    let junk = dir.path().join("x.txt");
    fs::write(&junk, b"not an image at all").unwrap();
    assert!(matches!(load_grayscale(&junk), Err(Error::UnsupportedFormat { .. })));
}

#[test]
fn crops() {
    let g = RealGrid::new(5, 3, (0..15).map(|v| v as f64).collect()).unwrap();
    let e = g.crop_to_even().unwrap();
    assert_eq!((e.width(), e.height()), (4, 2));
    let c = g.center_crop(3, 1).unwrap();
    assert_eq!(c.data(), &[6.0, 7.0, 8.0]);
    assert!(g.center_crop(6, 1).is_err());
}

#[test]
fn zero_phase_symmetric_target_has_real_hologram() {
    let mags = camera(16);
    assert!(is_symmetric_180(&mags));
    let zero = RealGrid::filled(16, 16, 0.0).unwrap();
    let g = idft(&build_target(&mags, &zero).unwrap()).unwrap();
    assert!(g.values().iter().all(|c| c.im.abs() < 1e-10));
}

#[test]
fn random_phase_is_seeded_and_in_range() {
    let a = random_phase(9, 7, 3).unwrap();
    assert_eq!(a, random_phase(9, 7, 3).unwrap());
    assert_ne!(a, random_phase(9, 7, 4).unwrap());
    let pi = std::f64::consts::PI;
    assert!(a.data().iter().all(|&p| (-pi..pi).contains(&p)));
}

#[test]
fn starting_holograms() {
    let mags = camera(16);
    let target = build_target(&mags, &random_phase(16, 16, 1).unwrap()).unwrap();
    let phase = continuous_hologram(&target, ModulationKind::Phase).unwrap();
    let m = phase.values()[0].norm();
    assert!(phase.values().iter().all(|c| (c.norm() - m).abs() < 1e-12));
    assert!((total_power(&phase) - total_power(&target)).abs() < 1e-9 * total_power(&target));

    let amp = continuous_hologram(&target, ModulationKind::Amplitude).unwrap();
    let peak = amp.values().iter().map(|c| c.re).fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
    assert!(amp.values().iter().all(|c| c.im == 0.0 && c.re >= 0.0));

    for scheme in ["phase:2", "phase:256", "amplitude:2", "amplitude:256"] {
        let s: ModulationScheme = scheme.parse().unwrap();
        let h = initial_hologram(&target, &s).unwrap();
        assert!(h.values().iter().all(|&v| s.contains(v)));
    }

    let scaled = device_scaled_target(&target, ModulationKind::Phase).unwrap();
    let start = continuous_hologram(&scaled, ModulationKind::Phase).unwrap();
    assert!(start.values().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
    let scaled = device_scaled_target(&target, ModulationKind::Amplitude).unwrap();
    let start = continuous_hologram(&scaled, ModulationKind::Amplitude).unwrap();
    let replay = dft(&start).unwrap();
    assert!(replay.max_abs_diff(&dft(&continuous_hologram(&target, ModulationKind::Amplitude).unwrap()).unwrap()).unwrap() < 1e-12);
}

#[test]
fn degenerate_target() {
    let zero = RealGrid::filled(4, 4, 0.0).unwrap();
    let t = build_target(&zero, &zero).unwrap();
    assert!(continuous_hologram(&t, ModulationKind::Phase).is_err());
}

fn grid_strategy() -> impl Strategy<Value = RealGrid> {
    (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..1.0, w * h)
            .prop_map(move |d| RealGrid::new(w, h, d).unwrap())
    })
}

proptest! {
    #[test]
    fn symmetrize_is_an_exact_projection(g in grid_strategy()) {
        let s = symmetrize_180(&g);
        prop_assert!(is_symmetric_180(&s));
        prop_assert_eq!(symmetrize_180(&s), s.clone());
        prop_assert!((s.mean() - g.mean()).abs() < 1e-14);
    }

    #[test]
    fn pgm_round_trip(bytes in prop::collection::vec(any::<u8>(), 12)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.pgm");
        let file = [b"P5\n4 3\n255\n".as_slice(), &bytes].concat();
        fs::write(&path, &file).unwrap();
        prop_assert_eq!(encode_pgm(&load_grayscale(&path).unwrap()), file);
    }
}
