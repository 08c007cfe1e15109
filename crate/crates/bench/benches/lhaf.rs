use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heraldsim::lhaf::{lhaf_repeated_with, lhaf_spm, Precision};
use heraldsim_bench::spec;
use std::hint::black_box;

fn repeated_vs_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("lhaf_small");
    for reps in [vec![2, 2, 2], vec![3, 3, 2, 2]] {
        let s = spec(&reps);
        let label = format!("{reps:?}");
        group.bench_with_input(BenchmarkId::new("repeated", &label), &s, |b, s| {
            b.iter(|| lhaf_repeated_with(black_box(s), Precision::Double))
        });
        let expanded = s.expand();
        group.bench_with_input(BenchmarkId::new("enumeration", &label), &expanded, |b, m| {
            b.iter(|| lhaf_spm(black_box(m)))
        });
    }
    group.finish();
}

fn precision(c: &mut Criterion) {
    let mut group = c.benchmark_group("lhaf_precision");
    group.sample_size(20);
    let s = spec(&[1, 2, 20, 1, 2, 20]);
    for p in [Precision::Double, Precision::Extended] {
        group.bench_function(format!("{p:?}"), |b| b.iter(|| lhaf_repeated_with(black_box(&s), p)));
    }
    group.finish();
}

criterion_group!(benches, repeated_vs_enumeration, precision);
criterion_main!(benches);
