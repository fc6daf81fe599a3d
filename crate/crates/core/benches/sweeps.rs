use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use finsler_core::catalog::{self, run_all};
use finsler_core::criteria::classify;
use finsler_core::curvature::matsumoto_pflat_test;
use finsler_core::par::Execution;
use finsler_core::phi::PhiSpec;
use finsler_core::sampling::{random_metric, rng, Region};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn classify_sweep(c: &mut Criterion) {
    let def = random_metric(&mut rng(1), PhiSpec::KropinaLinear { c: 0.5 });
    let pts = Region::default().points(16, 2);
    let mut group = c.benchmark_group("classify");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, pts.len()), &exec, |b, exec| {
            b.iter(|| classify(black_box(&def), &pts, *exec))
        });
    }
    group.finish();
}

fn pflat_sweep(c: &mut Criterion) {
    let def = (catalog::find("ex83").expect("catalog entry").build)().expect("catalog metric");
    let pts = Region::default().points(8, 3);
    let mut group = c.benchmark_group("matsumoto_pflat_test");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, pts.len()), &exec, |b, exec| {
            b.iter(|| matsumoto_pflat_test(black_box(&def), &pts, *exec))
        });
    }
    group.finish();
}

fn catalog_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("catalog");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| run_all(black_box(1), exec)));
    }
    group.finish();
}

criterion_group!(benches, classify_sweep, pflat_sweep, catalog_sweep);
criterion_main!(benches);
