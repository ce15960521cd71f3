use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mvmedian::config::DISC_RADIUS;
use mvmedian::filtering::{
    median_filter, Aggregator, AmoebaConfig, Boundary, FilterParams, Selection, StructuringElement,
};
use mvmedian::ImageGrid;

fn image(size: usize, channels: usize) -> ImageGrid {
    let data = (0..size * size * channels).map(|k| ((k * 37 + k / channels * 91) % 256) as f64).collect();
    ImageGrid::new(vec![size, size], channels, data).unwrap()
}

fn params(selection: Selection, aggregator: Aggregator) -> FilterParams {
    FilterParams { selection, aggregator, boundary: Boundary::Mirror, iterations: 1 }
}

fn filter(c: &mut Criterion) {
    let gray = image(64, 1);
    let pair = image(32, 2);
    let disc = || Selection::Element(StructuringElement::disc(DISC_RADIUS).unwrap());
    let mut g = c.benchmark_group("filter");
    g.sample_size(10);
    let p = params(disc(), Aggregator::Rank);
    g.bench_function("rank_disc_64", |b| b.iter(|| median_filter(black_box(&gray), &p).unwrap()));
    let p = params(disc(), Aggregator::L1);
    g.bench_function("l1_disc_32x2", |b| b.iter(|| median_filter(black_box(&pair), &p).unwrap()));
    let p = params(disc(), Aggregator::Oja);
    g.bench_function("oja_disc_32x2", |b| b.iter(|| median_filter(black_box(&pair), &p).unwrap()));
    let p = params(Selection::Amoeba { config: AmoebaConfig::default(), pilot: None }, Aggregator::Rank);
    g.bench_function("rank_amoeba_64", |b| b.iter(|| median_filter(black_box(&gray), &p).unwrap()));
    g.finish();
}

criterion_group!(benches, filter);
criterion_main!(benches);
