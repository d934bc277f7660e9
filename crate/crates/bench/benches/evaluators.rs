//! Benchmarks for the hot paths: TER evaluation, bound reports, exact
//! mutual information, and a small coverage run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use tilted_risk::bounds::{uniform_bounded, uniform_unbounded, BoundQuery, UniformKind};
use tilted_risk::harness::{run_coverage, ExperimentConfig, TiltSchedule};
use tilted_risk::info::{mutual_information_exact, LearningKernel};
use tilted_risk::risk::{ter, MomentBounds, Tilt};
use tilted_risk::spaces::builtin;
use tilted_risk::DiscreteDistribution;

fn bench_ter(c: &mut Criterion) {
    let losses: Vec<f64> = (0..100_000).map(|i| (i % 997) as f64 / 100.0).collect();
    let tilt = Tilt::new(-0.5).unwrap();
    c.bench_function("ter_100k_losses", |b| {
        b.iter(|| ter(black_box(&losses), tilt).unwrap())
    });
    let small: Vec<f64> = losses[..64].to_vec();
    c.bench_function("ter_64_losses", |b| b.iter(|| ter(black_box(&small), tilt).unwrap()));
}

fn bench_bounds(c: &mut Criterion) {
    let mut query = BoundQuery::new(0.05, 1024, Tilt::new(-0.1).unwrap());
    query.upper_bound_m = Some(1.0);
    query.card_h = Some(16);
    query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 1.2, kappa_t: 1.0 });
    c.bench_function("uniform_bounded_abs", |b| {
        b.iter(|| uniform_bounded(black_box(&query), UniformKind::Abs).unwrap())
    });
    c.bench_function("uniform_unbounded_abs_auto_zeta", |b| {
        b.iter(|| uniform_unbounded(black_box(&query), UniformKind::Abs).unwrap())
    });
}

fn bench_info(c: &mut Criterion) {
    let instance = builtin("bernoulli-2h").unwrap();
    let kernel = LearningKernel::TiltedGibbs {
        alpha: 2.0,
        tilt: Tilt::new(-1.0).unwrap(),
        prior: DiscreteDistribution::uniform(2).unwrap(),
    };
    c.bench_function("mutual_information_exact_n12", |b| {
        b.iter(|| mutual_information_exact(black_box(&kernel), &instance, 12).unwrap())
    });
}

fn bench_coverage(c: &mut Criterion) {
    let config = ExperimentConfig {
        instance: "bernoulli-2h".to_string(),
        family: "uniform-bounded".to_string(),
        n_grid: vec![256],
        trials: 100,
        delta: 0.05,
        tilt_schedule: TiltSchedule::Constant { gamma: -0.1 },
        epsilon_grid: vec![],
        alpha: 1.0,
        seed: 7,
    };
    c.bench_function("coverage_100_trials_n256", |b| {
        b.iter(|| run_coverage(black_box(&config)).unwrap())
    });
}

criterion_group!(benches, bench_ter, bench_bounds, bench_info, bench_coverage);
criterion_main!(benches);
