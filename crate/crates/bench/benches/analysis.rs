use std::hint::black_box;

use bmn_core::chain::{expected_moves_with, SolverChoice};
use bmn_core::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10);
    for (name, rules) in [("jacks5", fixtures::jacks5()), ("courts6", fixtures::courts6())] {
        group.bench_with_input(BenchmarkId::new("build_g0", name), &rules, |b, r| {
            b.iter(|| build_g0(black_box(r)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("verify_lemma", name), &rules, |b, r| {
            let graph = build_g0(r).unwrap();
            b.iter(|| verify_lemma(black_box(&graph)))
        });
        group.bench_with_input(BenchmarkId::new("check_absorbing", name), &rules, |b, r| {
            b.iter(|| check_absorbing(black_box(r)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("expected_moves_iterative", name), &rules, |b, r| {
            b.iter(|| expected_moves_with(black_box(r), 0.5, SolverChoice::Iterative).unwrap())
        });
    }
    let rules = fixtures::jacks5();
    group.bench_function("expected_moves_dense/jacks5", |b| {
        b.iter(|| expected_moves_with(black_box(&rules), 0.5, SolverChoice::Dense).unwrap())
    });
    group.finish();
}

criterion_group!(benches, analysis);
criterion_main!(benches);
