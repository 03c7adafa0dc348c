//! Benchmarks for the sampling and algebra kernels that dominate
//! experiment runtime.

use certikit::config::Caps;
use certikit::densesim::class_matrix;
use certikit::linalg;
use certikit::rng::seeded_rng;
use certikit::schurweyl::{sw_pmf, sw_sample};
use certikit::states::{maximally_mixed, paninski};
use certikit::symalg::{class_product_basis, ClassElement, ClassKey};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_insertion_sampling(c: &mut Criterion) {
    let alpha = paninski(8, 0.2).unwrap().spectrum();
    let mut group = c.benchmark_group("insertion sampling");
    group.sample_size(10);
    group.bench_function("shape sample, d=8 n=100k", |b| {
        let mut rng = seeded_rng(1);
        b.iter(|| black_box(sw_sample(&alpha, 100_000, &mut rng)));
    });
    group.finish();
}

fn bench_class_product(c: &mut Criterion) {
    c.bench_function("transposition square, ambient 8", |b| {
        let t = ClassKey::transposition();
        b.iter(|| black_box(class_product_basis(&t, &t, 8, &Caps::default()).unwrap()));
    });
}

fn bench_shape_law(c: &mut Criterion) {
    let alpha = maximally_mixed(3).spectrum();
    c.bench_function("exact shape law, d=3 n=20", |b| {
        b.iter(|| black_box(sw_pmf(&alpha, 20, &Caps::default()).unwrap()));
    });
}

fn bench_dense_kernels(c: &mut Criterion) {
    let mut rng = seeded_rng(2);
    let a = linalg::ginibre(243, 243, &mut rng);
    let bm = linalg::ginibre(243, 243, &mut rng);
    c.bench_function("complex matmul 243", |b| {
        b.iter(|| black_box(linalg::matmul(&a, &bm)));
    });
    let mut group = c.benchmark_group("dense operators");
    group.sample_size(10);
    group.bench_function("averaged transposition matrix, d=2 n=6", |b| {
        let elem = ClassElement::basis(ClassKey::transposition(), 6).unwrap();
        b.iter(|| black_box(class_matrix(&elem, 2, &Caps::default()).unwrap()));
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_insertion_sampling,
    bench_class_product,
    bench_shape_law,
    bench_dense_kernels
);
criterion_main!(benches);
