//! Criterion benchmarks for the hot paths of a Monte Carlo trial.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use eigensense::detect;
use eigensense::linalg::{eigh, eigvalsh_tridiagonal, gram, DEFAULT_TOL};
use eigensense::signal::{
    synthesize, Fading, Hypothesis, NoiseKind, SampleField, ScenarioConfig, SignalKind,
};
use eigensense::ComplexMatrix;

fn observation(k: usize, n: usize) -> ComplexMatrix {
    synthesize(&ScenarioConfig {
        k,
        n,
        sigma2: 1.0,
        hypothesis: Hypothesis::H1,
        noise: NoiseKind::Gaussian,
        signal: SignalKind::Gaussian,
        fading: Fading::Rayleigh,
        field: SampleField::Complex,
        seed: 1,
    })
    .expect("valid scenario")
    .y
}

pub fn benchmarks(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    for k in [10, 50, 200] {
        let y = observation(k, 10 * k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &y, |b, y| {
            b.iter(|| gram(black_box(y)))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("eigenvalues");
    group.sample_size(10);
    for k in [10, 50, 200] {
        let g = gram(&observation(k, 10 * k));
        group.bench_with_input(BenchmarkId::new("jacobi", k), &g, |b, g| {
            b.iter(|| eigh(black_box(g), DEFAULT_TOL).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tridiagonal", k), &g, |b, g| {
            b.iter(|| eigvalsh_tridiagonal(black_box(g)).unwrap())
        });
    }
    group.finish();

    let y = observation(10, 60);
    c.bench_function("trial/blind K=10 N=60", |b| {
        b.iter(|| detect::rmt_detect_blind(black_box(&y)).unwrap())
    });
    c.bench_function("trial/synthesize K=10 N=60", |b| {
        b.iter(|| observation(black_box(10), 60))
    });
}
