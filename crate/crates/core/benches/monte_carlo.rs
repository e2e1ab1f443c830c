//! Sequential vs parallel batch execution of the Monte Carlo kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbp_core::grid::FrontTrace;
use fbp_core::solver::feynman_kac_check;
use fbp_core::stochastic::{killed_bm_survival, KilledBmOptions};
use fbp_core::waves::SQRT2;
use fbp_core::{Exec, InitialCondition};

fn killed_bm(c: &mut Criterion) {
    let front = FrontTrace::from_fn(1.0, 0.01, |t| SQRT2 * t);
    let ic = InitialCondition::min_wave();
    let opts = KilledBmOptions { n_paths: 16_384, dt_mc: 1e-3, seed: 1, bridge: true };
    let mut g = c.benchmark_group("killed_bm_survival");
    g.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| killed_bm_survival(black_box(&ic), &front, &[0.5, 1.0], &opts, exec).unwrap())
        });
    }
    g.finish();
}

fn feynman_kac(c: &mut Criterion) {
    let front = FrontTrace::from_fn(1.0, 0.01, |t| SQRT2 * t);
    let ic = InitialCondition::min_wave();
    let mut g = c.benchmark_group("feynman_kac_check");
    g.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| feynman_kac_check(black_box(&ic), &front, 1.0, SQRT2 + 1.0, 8192, 1e-3, 2, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, killed_bm, feynman_kac);
criterion_main!(benches);
