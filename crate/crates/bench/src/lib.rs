//! Benchmark bodies, kept in a library so they type-check with the workspace.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use image::{Rgb, RgbImage};
use pvqa_core::pipeline::{generate, generate_item};
use pvqa_core::pseudo_video::warp;
use pvqa_core::{parse_answer, AffineParams, CaptionedSample, Corpus, GenerationConfig, QuestionKind};

pub fn corpus(n: usize) -> Corpus {
    let samples = (0..n)
        .map(|i| CaptionedSample::new(i.to_string(), format!("{i}.jpg"), format!("a photo of thing {i}")))
        .collect();
    Corpus::new(samples, ".").expect("unique ids")
}

pub fn generation(c: &mut Criterion) {
    let corpus = corpus(5000);
    let mut group = c.benchmark_group("generate_item");
    for kind in QuestionKind::ALL {
        let config = GenerationConfig {
            max_scenes: 6,
            question_mix: vec![(kind, 1.0)],
            ..Default::default()
        };
        let mut i = 0;
        group.bench_function(BenchmarkId::from_parameter(kind), |b| {
            b.iter(|| {
                i += 1;
                generate_item(&config, &corpus, black_box(i)).unwrap()
            })
        });
    }
    group.finish();

    let config = GenerationConfig {
        question_mix: QuestionKind::ALL.iter().map(|k| (*k, 1.0)).collect(),
        ..Default::default()
    };
    let mut group = c.benchmark_group("generate_1000");
    group.throughput(Throughput::Elements(1000));
    group.sample_size(20);
    group.bench_function("sequential", |b| {
        b.iter(|| generate(&config, &corpus, 1000, 1).unwrap())
    });
    group.finish();
}

pub fn parsing(c: &mut Criterion) {
    let options: Vec<String> = ["a dog on a beach", "a red car", "two people eating", "a cat asleep"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut group = c.benchmark_group("parse_answer");
    for (name, raw) in [
        ("letter", "C"),
        ("answer_is", "After looking closely, I believe the answer is (B)."),
        ("substring", "The scene shows two people eating at a table."),
        ("unparseable", "I cannot tell from these frames what happens."),
    ] {
        group.bench_function(name, |b| b.iter(|| parse_answer(black_box(raw), &options)));
    }
    group.finish();
}

pub fn warping(c: &mut Criterion) {
    let src = RgbImage::from_fn(336, 336, |x, y| Rgb([x as u8, y as u8, (x ^ y) as u8]));
    let params = AffineParams {
        rotation_deg: 3.5,
        scale: 1.04,
        translate_x_frac: 0.02,
        translate_y_frac: -0.03,
    };
    let mut group = c.benchmark_group("warp_336");
    group.throughput(Throughput::Elements(336 * 336));
    group.bench_function("identity", |b| {
        b.iter(|| warp(black_box(&src), &AffineParams::IDENTITY))
    });
    group.bench_function("drifted", |b| b.iter(|| warp(black_box(&src), &params)));
    group.finish();
}
