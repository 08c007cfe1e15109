use criterion::{criterion_group, criterion_main, Criterion};
use heraldsim::schemes::{self, RunOptions};
use std::hint::black_box;

fn presets(c: &mut Criterion) {
    let mut group = c.benchmark_group("herald");
    group.sample_size(10);
    let opts = RunOptions::default();
    let cases = [
        ("fock_lossy", schemes::scheme_fock(1.0, 0.8, 0.8, 2)),
        ("cat_m1", schemes::scheme_cat(0.5, 0.9, 0.9, 1)),
        ("cubic", schemes::scheme_cubic(schemes::CUBIC_TARGET_A, 0.95, 0.95)),
    ];
    for (name, spec) in &cases {
        group.bench_function(*name, |b| b.iter(|| schemes::run(black_box(spec), &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, presets);
criterion_main!(benches);
