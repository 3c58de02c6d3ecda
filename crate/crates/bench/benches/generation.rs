use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hpcgi_bench::fixture_object;
use hpcgi_core::hadamard::{build_hadamard, Convention};
use hpcgi_core::memory::run_generator;
use hpcgi_core::ordering::{index_ordering, mpcgi_sequence, thdc_rd_permutation, OrderingScheme};
use hpcgi_core::pipeline::Traversal;
use hpcgi_core::sim::{acquire, reconstruct, NoiseModel};

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for l in [3u32, 4, 5] {
        g.bench_with_input(BenchmarkId::new("breadth", l), &l, |b, &l| {
            b.iter(|| run_generator(black_box(l), Traversal::BreadthFirst).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("depth", l), &l, |b, &l| {
            b.iter(|| run_generator(black_box(l), Traversal::DepthFirst).unwrap())
        });
    }
    g.finish();
}

fn orderings(c: &mut Criterion) {
    let mut g = c.benchmark_group("order");
    for k in [6u32, 8, 10] {
        g.bench_with_input(BenchmarkId::new("thdc_rd", k), &k, |b, &k| {
            b.iter(|| thdc_rd_permutation(black_box(k), Convention::RightExpand).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("index_rd", k), &k, |b, &k| {
            b.iter(|| index_ordering(black_box(k), OrderingScheme::RussianDolls).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("hadamard", k), &k, |b, &k| {
            b.iter(|| build_hadamard(black_box(k), Convention::LeftExpand).unwrap())
        });
    }
    g.finish();
}

fn reconstruction(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruct");
    for l in [3u32, 4] {
        let seq = mpcgi_sequence(l).unwrap();
        let o = fixture_object(l);
        let records = acquire(&seq, &o, NoiseModel::None).unwrap();
        g.bench_function(BenchmarkId::new("acquire", l), |b| {
            b.iter(|| acquire(&seq, black_box(&o), NoiseModel::None).unwrap())
        });
        g.bench_function(BenchmarkId::new("full", l), |b| {
            b.iter(|| reconstruct(black_box(&records), &seq, seq.len()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, generation, orderings, reconstruction);
criterion_main!(benches);
