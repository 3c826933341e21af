use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holoquant::{
    build_target, dft, random_phase, win_rate, ComplexField, Metric, ModulationKind,
    ModulationScheme, Parallelism, RealGrid, SearchState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn target(n: usize) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mags = RealGrid::new(n, n, (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
    build_target(&mags, &random_phase(n, n, 0).unwrap()).unwrap()
}

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn best_value_step(c: &mut Criterion) {
    let t = target(64);
    let mut group = c.benchmark_group("best_value_step_64x64");
    for scheme in ["phase:2", "phase:256", "amplitude:256"] {
        let s: ModulationScheme = scheme.parse().unwrap();
        for screening in [true, false] {
            for (mode, parallelism) in MODES {
                let mut state = SearchState::new(&t, &s, Metric::Eq2).unwrap();
                state.set_screening(screening);
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                let label = format!(
                    "{}/{}",
                    if screening { "screened" } else { "exhaustive" },
                    mode
                );
                group.bench_function(BenchmarkId::new(scheme, label), |b| {
                    b.iter(|| {
                        let (x, y) = (rng.gen_range(0..64), rng.gen_range(0..64));
                        state.best_value_step(x, y, parallelism).unwrap()
                    })
                });
            }
        }
    }
    group.finish();
}

fn win_rates(c: &mut Criterion) {
    let t = target(64);
    let mut group = c.benchmark_group("win_rate_64x64_100px");
    group.sample_size(10);
    for (kind, name) in [(ModulationKind::Phase, "phase"), (ModulationKind::Amplitude, "amplitude")] {
        for (mode, parallelism) in MODES {
            group.bench_function(BenchmarkId::new(name, mode), |b| {
                b.iter(|| win_rate(&t, kind, 256, 100, 0, Metric::Eq2, parallelism).unwrap())
            });
        }
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft");
    for n in [64, 256] {
        let t = target(n);
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| dft(&t).unwrap()));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2));
    targets = best_value_step, win_rates, transform
}
criterion_main!(benches);
