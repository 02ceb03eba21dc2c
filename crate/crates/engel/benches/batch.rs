use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use engel::batch;
use engel::conj::{verify_sandwich_batch, verify_sandwich_batch_seq};
use engel::expmap::jacobian_det;
use engel::jacobian_closed::certify::sign_lemmas;
use engel::pendulum::{from_elliptic, EllipticCoords};
use engel::Covector;

fn covectors(n: usize) -> Vec<Covector> {
    (0..n)
        .map(|i| {
            let k = 0.1 + 0.8 * (i as f64 + 0.5) / n as f64;
            let phi = 0.37 * i as f64;
            let ec = if i % 2 == 0 {
                EllipticCoords::c1(phi, k, 1.0)
            } else {
                EllipticCoords::c2(phi, k, 1.0, 1.0)
            };
            from_elliptic(&ec).unwrap()
        })
        .collect()
}

fn sandwich(c: &mut Criterion) {
    let lams = covectors(32);
    let mut g = c.benchmark_group("sandwich_32");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("batch", if batch::is_parallel() { "rayon" } else { "fallback" }), |b| {
        b.iter(|| verify_sandwich_batch(black_box(&lams)))
    });
    g.bench_function(BenchmarkId::new("batch", "sequential"), |b| {
        b.iter(|| verify_sandwich_batch_seq(black_box(&lams)))
    });
    g.finish();
}

fn determinants(c: &mut Criterion) {
    let lams = covectors(64);
    let det = |lam: &Covector| jacobian_det(lam, 7.5).unwrap();
    let mut g = c.benchmark_group("jacobian_det_64");
    g.sample_size(20);
    g.bench_function("map", |b| b.iter(|| batch::map(black_box(&lams), det)));
    g.bench_function("map_seq", |b| b.iter(|| batch::map_seq(black_box(&lams), det)));
    g.finish();
}

fn lemma_grids(c: &mut Criterion) {
    let mut g = c.benchmark_group("sign_lemmas");
    g.sample_size(20);
    g.bench_function("2000", |b| b.iter(|| sign_lemmas(black_box(2000))));
    g.finish();
}

criterion_group!(benches, sandwich, determinants, lemma_grids);
criterion_main!(benches);
