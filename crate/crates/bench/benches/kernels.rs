use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ordcmp_bench::{exchangeable, fbm_sampler, median_event};
use ordcmp_core::bounds::a_integral;
use ordcmp_core::mc::{estimate_prob_le, ArraySampler, McOptions};
use ordcmp_core::rng::Workers;
use ordcmp_core::special::{bivariate_cdf, Correlation};

fn special(c: &mut Criterion) {
    let rho = Correlation::new(0.6).unwrap();
    c.bench_function("bivariate_cdf", |b| b.iter(|| bivariate_cdf(black_box(0.3), black_box(-0.7), rho)));
    c.bench_function("a_integral n=5 r=2", |b| b.iter(|| a_integral(black_box(-0.4), black_box(0.9), 5, 2)));
}

fn arrays(c: &mut Criterion) {
    let spec = exchangeable(3, 3, 0.4);
    let sampler = ArraySampler::new(&spec).unwrap();
    c.bench_function("sample_array 3x3 x1000", |b| b.iter(|| sampler.samples(black_box(7), 1000).count()));
    let (sel, u) = median_event(3, 3, 0.5);
    let opts = McOptions::default().with_workers(Workers::new(1));
    c.bench_function("estimate_prob_le 3x3 1e5", |b| {
        b.iter(|| estimate_prob_le(&spec, &sel, &u, 100_000, black_box(3), &opts).unwrap())
    });
}

fn paths(c: &mut Criterion) {
    let sampler = fbm_sampler(1.2, 4097);
    c.bench_function("fbm circulant m=4097 x16", |b| b.iter(|| sampler.block(black_box(11), 0, 16)));
}

criterion_group!(benches, special, arrays, paths);
criterion_main!(benches);
