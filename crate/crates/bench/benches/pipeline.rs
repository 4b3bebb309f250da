use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    pvqa_bench::generation,
    pvqa_bench::parsing,
    pvqa_bench::warping
);
criterion_main!(benches);
