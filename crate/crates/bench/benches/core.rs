use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shapetree::{
    build_greedy_binary, build_greedy_ternary, build_idealized_binary, histogram_estimate, mc_risk, monotonize, sample,
    Estimator, MonteCarlo, NamedDensity,
};
use shapetree_bench::{zipf, zipf_sample};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    for k in [64usize, 4096, 262_144] {
        let f = zipf(k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &f, |b, f| b.iter(|| sample(f, black_box(10_000), 7)));
    }
    group.finish();
}

fn trees(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree");
    for k in [64usize, 4096, 262_144] {
        let counts = zipf_sample(k, 100_000);
        let f = zipf(k);
        group.bench_with_input(BenchmarkId::new("greedy-binary", k), &counts, |b, c| b.iter(|| build_greedy_binary(c)));
        group.bench_with_input(BenchmarkId::new("greedy-ternary", k), &counts, |b, c| b.iter(|| build_greedy_ternary(c)));
        group.bench_with_input(BenchmarkId::new("idealized-binary", k), &f, |b, f| {
            b.iter(|| build_idealized_binary(f, black_box(100_000)).unwrap())
        });
    }
    group.finish();
}

fn monotonization(c: &mut Criterion) {
    let counts = zipf_sample(4096, 1_000);
    let raw = histogram_estimate(&build_greedy_binary(&counts), &counts).unwrap();
    c.bench_function("monotonize", |b| b.iter(|| monotonize(black_box(&raw)).unwrap()));
}

fn risk(c: &mut Criterion) {
    let f = NamedDensity::new("harmonic-zipf", zipf(1024));
    let mut group = c.benchmark_group("mc_risk");
    group.sample_size(10);
    for threads in [1usize, 4] {
        let mc = MonteCarlo::new(100, 1).threads(threads);
        group.bench_with_input(BenchmarkId::new("greedy-binary+monotonize", threads), &mc, |b, mc| {
            b.iter(|| mc_risk(Estimator::GreedyBinaryMonotonize, &f, 10_000, mc).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, trees, monotonization, risk);
criterion_main!(benches);
