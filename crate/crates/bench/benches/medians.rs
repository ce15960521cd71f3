use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mvmedian::medians::{median_chs, median_halfspace, median_l1, median_oja, median_trl1, L1Config, OjaMode};
use mvmedian::WeightedPointSet;

fn cloud(n: usize) -> WeightedPointSet {
    let rows: Vec<[f64; 2]> =
        (0..n).map(|k| [(1.3 * k as f64).sin() + 0.1 * k as f64 % 0.7, (2.1 * k as f64).cos()]).collect();
    WeightedPointSet::from_rows(&rows).unwrap()
}

fn medians(c: &mut Criterion) {
    let cfg = L1Config::default();
    let mut g = c.benchmark_group("median");
    for n in [9, 25, 60] {
        let set = cloud(n);
        g.bench_with_input(BenchmarkId::new("l1", n), &set, |b, s| b.iter(|| median_l1(black_box(s), &cfg).unwrap()));
        g.bench_with_input(BenchmarkId::new("trl1", n), &set, |b, s| {
            b.iter(|| median_trl1(black_box(s), &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("oja", n), &set, |b, s| {
            b.iter(|| median_oja(black_box(s), OjaMode::Auto).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("halfspace", n), &set, |b, s| {
            b.iter(|| median_halfspace(black_box(s)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("chs", n), &set, |b, s| b.iter(|| median_chs(black_box(s)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, medians);
criterion_main!(benches);
