//! Sequential vs rayon-parallel replication of the same experiments.
//! Both arms produce identical results; only wall time differs.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dslab::mc::{clt_experiment, slln_proxy, wlln_experiment, Execution, SampleSource};
use dslab::{DeletionPlan, DeletionPolicy, DeletionSchedule, DistributionSpec};

fn arms() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::sequential()), ("parallel", Execution::parallel())]
}

fn bench(c: &mut Criterion) {
    let bern: SampleSource = DistributionSpec::bernoulli(0.5).unwrap().into();
    let normal: SampleSource = DistributionSpec::normal(2.0, 1.0).unwrap().into();
    let prefix = DeletionPlan::new(DeletionSchedule::Power { r: 0.5 }, DeletionPolicy::Prefix);
    let random = DeletionPlan::new(DeletionSchedule::Power { r: 0.25 }, DeletionPolicy::UniformRandom);

    let mut g = c.benchmark_group("wlln n=10^4 reps=10^3");
    for (name, exec) in arms() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| wlln_experiment(&bern, &prefix, 0.05, &[10_000], 1_000, 1, &exec).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("clt uniform_random n=10^3 reps=10^3");
    for (name, exec) in arms() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| clt_experiment(&normal, &random, 1_000, 1_000, 1, &exec).unwrap());
        });
    }
    g.finish();

    let extremal = DeletionPlan::new(DeletionSchedule::Power { r: 0.5 }, DeletionPolicy::ExtremalAbs);
    let law = DistributionSpec::exponential(1.0).unwrap();
    let mut g = c.benchmark_group("slln extremal n_max=10^4 paths=64");
    for (name, exec) in arms() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| slln_proxy(&law, &extremal, 0.05, &[100, 1_000, 10_000], 10_000, 64, 1, &exec).unwrap());
        });
    }
    g.finish();
}

criterion_group!(
    name = group;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3))
        .sample_size(10);
    targets = bench
);
criterion_main!(group);
