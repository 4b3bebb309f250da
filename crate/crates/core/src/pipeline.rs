//! End-to-end generation and verification over item indices.
//!
//! Each item is a pure function of `(config, corpus, index)`, so the work is
//! split across a rayon pool and collected back in index order.

use std::collections::HashMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::dataset::ManifestRecord;
use crate::eval::TaskId;
use crate::pseudo_video::{
    frame_path, render_frames, sample_structure, sample_structure_seeded, ConfigError, GenerationConfig,
    PseudoVideoSpec, RenderError,
};
use crate::question::{make_question, oracle_verify, MCQItem, QuestionError, QuestionKind};
use crate::seed::{self, stream_rng, Stream};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("item {index}: {source}")]
    Corpus {
        index: u64,
        #[source]
        source: CorpusError,
    },
    #[error("item {index}: {source}")]
    Question {
        index: u64,
        #[source]
        source: QuestionError,
    },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedItem {
    pub spec: PseudoVideoSpec,
    pub item: MCQItem,
}

impl GeneratedItem {
    pub fn record(&self) -> ManifestRecord {
        ManifestRecord::from_item(&self.item, &self.spec)
    }
}

/// Question kind for an item seed, drawn by weight from the mix.
pub fn choose_kind(config: &GenerationConfig, item_seed: u64) -> QuestionKind {
    if let [(only, _)] = config.question_mix.as_slice() {
        return *only;
    }
    let weights = config.question_mix.iter().map(|(_, w)| *w);
    let dist = WeightedIndex::new(weights).expect("validated mix");
    config.question_mix[dist.sample(&mut stream_rng(item_seed, Stream::Kind))].0
}

/// Generates the item at `index`.
pub fn generate_item(config: &GenerationConfig, corpus: &Corpus, index: u64) -> Result<GeneratedItem, GenerateError> {
    let item_seed = seed::item_seed(config.master_seed, index);
    let kind = choose_kind(config, item_seed);
    let spec =
        sample_structure(config, kind, corpus, index).map_err(|source| GenerateError::Corpus { index, source })?;
    let mut item = make_question(&spec, kind, &mut stream_rng(item_seed, Stream::Question))
        .map_err(|source| GenerateError::Question { index, source })?;
    item.frames = (0..spec.total_frames)
        .map(|i| frame_path(&spec.video_id, i, config.frame_format))
        .collect();
    Ok(GeneratedItem { spec, item })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, GenerateError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| GenerateError::Pool(e.to_string()))
}

/// Generates items `0..count` using `jobs` worker threads. The output does
/// not depend on `jobs`.
pub fn generate(
    config: &GenerationConfig,
    corpus: &Corpus,
    count: u64,
    jobs: usize,
) -> Result<Vec<GeneratedItem>, GenerateError> {
    config.validate()?;
    if jobs <= 1 {
        return (0..count).map(|i| generate_item(config, corpus, i)).collect();
    }
    pool(jobs)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| generate_item(config, corpus, i))
            .collect()
    })
}

/// Renders the frames of every item under `out_dir`.
pub fn render_all(
    items: &[GeneratedItem],
    corpus: &Corpus,
    out_dir: &Path,
    config: &GenerationConfig,
    jobs: usize,
) -> Result<(), GenerateError> {
    let render = |g: &GeneratedItem| -> Result<(), GenerateError> {
        let frames = render_frames(&g.spec, corpus, out_dir, config.output_resolution, config.frame_format)?;
        debug_assert_eq!(frames, g.item.frames);
        Ok(())
    };
    if jobs <= 1 {
        return items.iter().try_for_each(render);
    }
    pool(jobs)?.install(|| items.par_iter().try_for_each(render))
}

/// A manifest line that failed verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 1-based manifest line.
    pub line: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// `(line, record id, source id)` for sources missing from the corpus.
    pub unknown_sources: Vec<(usize, String, String)>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.unknown_sources.is_empty()
    }
}

enum Outcome {
    Ok,
    Violation(String),
    Unknown(Vec<String>),
}

fn verify_record(record: &ManifestRecord, corpus: &Corpus, config: &GenerationConfig) -> Outcome {
    let TaskId::Question(kind) = record.task else {
        return Outcome::Violation(format!("task {} is not a generated question kind", record.task));
    };
    let unknown: Vec<String> = record
        .source_ids
        .iter()
        .filter(|id| corpus.get(id).is_none())
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Outcome::Unknown(unknown);
    }

    let spec = match sample_structure_seeded(config, kind, corpus, &record.video_id, record.seed) {
        Ok(spec) => spec,
        Err(e) => return Outcome::Violation(format!("cannot regenerate spec: {e}")),
    };
    let regenerated_sources: Vec<&str> = spec.scenes.iter().map(|s| s.sample_id.as_str()).collect();
    if regenerated_sources != record.source_ids || spec.durations() != record.durations {
        return Outcome::Violation(
            "scene timeline differs from the one regenerated from the seed (check corpus, max scenes and max frames)"
                .into(),
        );
    }

    let regenerated = match make_question(&spec, kind, &mut stream_rng(record.seed, Stream::Question)) {
        Ok(item) => item,
        Err(e) => return Outcome::Violation(format!("cannot regenerate question: {e}")),
    };
    if regenerated.question != record.question {
        return Outcome::Violation("question text differs from regeneration".into());
    }
    let mut a = regenerated.options.clone();
    let mut b = record.options.clone();
    a.sort();
    b.sort();
    if a != b {
        return Outcome::Violation("option set differs from regeneration".into());
    }

    let recorded = MCQItem {
        options: record.options.clone(),
        answer_index: record.answer,
        ..regenerated
    };
    match oracle_verify(&recorded, &spec) {
        Ok(derived) if derived == record.answer => Outcome::Ok,
        Ok(derived) => Outcome::Violation(format!("answer is {} but the oracle derives {derived}", record.answer)),
        Err(e) => Outcome::Violation(e.to_string()),
    }
}

/// Regenerates each record's video from its seed and checks the recorded
/// answer against the oracle.
pub fn verify(
    records: &[ManifestRecord],
    corpus: &Corpus,
    config: &GenerationConfig,
    jobs: usize,
) -> Result<VerifyReport, GenerateError> {
    let run = || -> Vec<Outcome> { records.par_iter().map(|r| verify_record(r, corpus, config)).collect() };
    let outcomes = pool(jobs)?.install(run);

    let mut report = VerifyReport {
        checked: records.len(),
        ..Default::default()
    };
    for (i, (record, outcome)) in records.iter().zip(outcomes).enumerate() {
        match outcome {
            Outcome::Ok => {}
            Outcome::Violation(reason) => report.violations.push(Violation {
                line: i + 1,
                id: record.id.clone(),
                reason,
            }),
            Outcome::Unknown(ids) => {
                for src in ids {
                    report.unknown_sources.push((i + 1, record.id.clone(), src));
                }
            }
        }
    }
    Ok(report)
}

/// Item counts per kind; handy for checking a mix.
pub fn kind_counts(items: &[GeneratedItem]) -> HashMap<QuestionKind, usize> {
    let mut counts = HashMap::new();
    for g in items {
        *counts.entry(g.item.kind).or_default() += 1;
    }
    counts
}
