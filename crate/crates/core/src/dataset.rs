//! Manifest files: one MCQA item per line in a fixed canonical form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::TaskId;
use crate::pseudo_video::PseudoVideoSpec;
use crate::question::MCQItem;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invalid record: {message}")]
    Invalid { line: usize, message: String },
}

impl ManifestError {
    /// 1-based line of the offending record, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Parse { line, .. } | Self::Invalid { line, .. } => Some(*line),
            Self::Io { .. } => None,
        }
    }
}

/// One line of a manifest. Field order here is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub video_id: String,
    pub task: TaskId,
    pub question: String,
    pub options: Vec<String>,
    pub answer: usize,
    /// Relative frame paths in temporal order.
    pub frames: Vec<String>,
    #[serde(default)]
    pub n_scenes: usize,
    #[serde(default)]
    pub scene_boundaries: Vec<usize>,
    #[serde(default)]
    pub durations: Vec<usize>,
    #[serde(default)]
    pub source_ids: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Present only on shuffled variants: `frames[i]` was originally at
    /// position `permutation[i]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

impl ManifestRecord {
    pub fn from_item(item: &MCQItem, spec: &PseudoVideoSpec) -> Self {
        Self {
            id: item.item_id.clone(),
            video_id: item.video_id.clone(),
            task: item.kind.into(),
            question: item.question.clone(),
            options: item.options.clone(),
            answer: item.answer_index,
            frames: item.frames.clone(),
            n_scenes: spec.n_scenes(),
            scene_boundaries: spec.scene_boundaries.clone(),
            durations: spec.durations(),
            source_ids: spec.scenes.iter().map(|s| s.sample_id.clone()).collect(),
            seed: spec.item_seed,
            permutation: None,
        }
    }

    /// Checks the record's internal invariants.
    pub fn check(&self) -> Result<(), String> {
        if self.options.len() < 2 {
            return Err(format!("{} options, need at least 2", self.options.len()));
        }
        if self.answer >= self.options.len() {
            return Err(format!(
                "answer {} out of range for {} options",
                self.answer,
                self.options.len()
            ));
        }
        let total: usize = self.durations.iter().sum();
        if self.frames.len() != total {
            return Err(format!("{} frames but durations sum to {total}", self.frames.len()));
        }
        if !self.durations.is_empty() {
            if self.durations.len() != self.n_scenes {
                return Err(format!(
                    "{} durations for {} scenes",
                    self.durations.len(),
                    self.n_scenes
                ));
            }
            let mut start = 0;
            let expected: Vec<usize> = self
                .durations
                .iter()
                .map(|d| {
                    let b = start;
                    start += d;
                    b
                })
                .collect();
            if self.scene_boundaries != expected {
                return Err(format!(
                    "scene_boundaries {:?} do not match durations (expected {expected:?})",
                    self.scene_boundaries
                ));
            }
        }
        if let Some(perm) = &self.permutation {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..self.frames.len()).collect::<Vec<_>>() {
                return Err("permutation is not a permutation of the frame indices".into());
            }
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest records always serialize")
    }
}

/// Writes `records` canonically: one compact JSON object per line, LF
/// terminated. An empty list produces an empty file.
pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<(), ManifestError> {
    let io_err = |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    write_manifest_to(records, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn write_manifest_to<W: Write>(records: &[ManifestRecord], w: &mut W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text)
}

/// Parses manifest text. Blank lines are skipped but still counted.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRecord>, ManifestError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(line).map_err(|e| ManifestError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        record
            .check()
            .map_err(|message| ManifestError::Invalid { line: i + 1, message })?;
        records.push(record);
    }
    Ok(records)
}

/// Bucketed counts with summary statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Histogram {
    pub buckets: BTreeMap<usize, usize>,
}

impl Histogram {
    pub fn add(&mut self, value: usize) {
        *self.buckets.entry(value).or_default() += 1;
    }

    pub fn count(&self) -> usize {
        self.buckets.values().sum()
    }

    pub fn min(&self) -> Option<usize> {
        self.buckets.keys().next().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.buckets.keys().next_back().copied()
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.count();
        (n > 0).then(|| self.buckets.iter().map(|(v, c)| (*v * *c) as f64).sum::<f64>() / n as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetStats {
    pub total: usize,
    pub per_task: BTreeMap<TaskId, usize>,
    pub n_scenes: Histogram,
    /// One entry per scene, across all items.
    pub durations: Histogram,
    pub total_frames: Histogram,
    pub option_counts: Histogram,
}

impl DatasetStats {
    fn histograms(&self) -> [(&'static str, &Histogram); 4] {
        [
            ("n_scenes", &self.n_scenes),
            ("duration", &self.durations),
            ("total_frames", &self.total_frames),
            ("options", &self.option_counts),
        ]
    }

    /// Human-readable aligned summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "items: {}", self.total).unwrap();
        for (task, count) in &self.per_task {
            writeln!(out, "  {:<4} {count:>8}", task.abbreviation()).unwrap();
        }
        writeln!(out, "{:<14} {:>6} {:>6} {:>9}", "metric", "min", "max", "mean").unwrap();
        for (name, h) in self.histograms() {
            let fmt_opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
            let mean = h.mean().map_or("-".to_string(), |m| format!("{m:.3}"));
            writeln!(
                out,
                "{name:<14} {:>6} {:>6} {mean:>9}",
                fmt_opt(h.min()),
                fmt_opt(h.max())
            )
            .unwrap();
        }
        for (name, h) in self.histograms() {
            writeln!(out, "{name} histogram:").unwrap();
            for (v, c) in &h.buckets {
                writeln!(out, "  {v:>6} {c:>8}").unwrap();
            }
        }
        out
    }

    /// `metric,key,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,key,value\n");
        writeln!(out, "items,total,{}", self.total).unwrap();
        for (task, count) in &self.per_task {
            writeln!(out, "task,{task},{count}").unwrap();
        }
        for (name, h) in self.histograms() {
            if let (Some(min), Some(max), Some(mean)) = (h.min(), h.max(), h.mean()) {
                writeln!(out, "{name},min,{min}").unwrap();
                writeln!(out, "{name},max,{max}").unwrap();
                writeln!(out, "{name},mean,{mean:.6}").unwrap();
            }
            for (v, c) in &h.buckets {
                writeln!(out, "{name},{v},{c}").unwrap();
            }
        }
        out
    }
}

pub fn dataset_stats(records: &[ManifestRecord]) -> DatasetStats {
    let mut stats = DatasetStats {
        total: records.len(),
        ..Default::default()
    };
    for r in records {
        *stats.per_task.entry(r.task).or_default() += 1;
        stats.n_scenes.add(r.n_scenes);
        for &d in &r.durations {
            stats.durations.add(d);
        }
        stats.total_frames.add(r.frames.len());
        stats.option_counts.add(r.options.len());
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::question::QuestionKind;
    use proptest::prelude::*;

    fn record(id: &str, task: TaskId, durations: Vec<usize>, options: usize) -> ManifestRecord {
        let total: usize = durations.iter().sum();
        let mut b = 0;
        let boundaries = durations
            .iter()
            .map(|d| {
                let x = b;
                b += d;
                x
            })
            .collect();
        ManifestRecord {
            id: id.into(),
            video_id: format!("v-{id}"),
            task,
            question: "Q?".into(),
            options: (0..options).map(|i| format!("opt {i}")).collect(),
            answer: 0,
            frames: (0..total).map(|i| format!("videos/v/frame_{i:05}.jpg")).collect(),
            n_scenes: durations.len(),
            scene_boundaries: boundaries,
            durations: durations.clone(),
            source_ids: (0..durations.len()).map(|i| i.to_string()).collect(),
            seed: u64::MAX,
            permutation: None,
        }
    }

    #[test]
    fn canonical_key_order() {
        let line = record("a", TaskId::Question(QuestionKind::R1), vec![1], 2).to_line();
        let keys = [
            "\"id\"",
            "\"video_id\"",
            "\"task\"",
            "\"question\"",
            "\"options\"",
            "\"answer\"",
            "\"frames\"",
            "\"n_scenes\"",
            "\"scene_boundaries\"",
            "\"durations\"",
            "\"source_ids\"",
            "\"seed\"",
        ];
        let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(!line.contains(": ") && !line.contains(", "));
        assert!(line.contains("\"seed\":18446744073709551615"));
        assert!(!line.contains("permutation"));
    }

    #[test]
    fn write_read_round_trip_and_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            record("a", TaskId::Question(QuestionKind::R1), vec![2, 3], 4),
            record("b", TaskId::AC, vec![1], 2),
        ];
        let p1 = dir.path().join("m1.jsonl");
        let p2 = dir.path().join("m2.jsonl");
        write_manifest(&recs, &p1).unwrap();
        write_manifest(&recs, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        let bytes = fs::read(&p1).unwrap();
        assert!(bytes.ends_with(b"}\n") && !bytes.ends_with(b"\n\n"));
        assert_eq!(read_manifest(&p1).unwrap(), recs);

        let empty = dir.path().join("empty.jsonl");
        write_manifest(&[], &empty).unwrap();
        assert_eq!(fs::metadata(&empty).unwrap().len(), 0);
        assert!(read_manifest(&empty).unwrap().is_empty());
    }

    #[test]
    fn invalid_answer_reports_line() {
        let mut bad = record("c", TaskId::OC, vec![1], 4);
        bad.answer = 5;
        let text = format!(
            "{}\n{}\n{}\n",
            record("a", TaskId::OC, vec![1], 4).to_line(),
            record("b", TaskId::OC, vec![1], 4).to_line(),
            bad.to_line()
        );
        let err = parse_manifest(&text).unwrap_err();
        assert!(matches!(err, ManifestError::Invalid { line: 3, .. }), "{err}");
    }

    #[test]
    fn frame_count_mismatch_is_invalid() {
        let mut bad = record("a", TaskId::OC, vec![2, 2], 4);
        bad.frames.pop();
        assert!(matches!(
            parse_manifest(&bad.to_line()),
            Err(ManifestError::Invalid { line: 1, .. })
        ));
    }

    #[test]
    fn malformed_line_is_parse_error() {
        let text = format!("{}\n{{not json\n", record("a", TaskId::OC, vec![1], 2).to_line());
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn stats_counts_and_extremes() {
        let recs = vec![
            record("a", TaskId::Question(QuestionKind::R1), vec![5, 5, 5, 5], 4),
            record("b", TaskId::Question(QuestionKind::R3), vec![1, 2], 3),
            record("c", TaskId::Question(QuestionKind::R1), vec![3, 1], 2),
        ];
        let s = dataset_stats(&recs);
        assert_eq!(s.per_task.values().sum::<usize>(), 3);
        assert_eq!(s.total_frames.max(), Some(20));
        assert_eq!(s.n_scenes.min(), Some(2));
        assert_eq!(s.durations.count(), 8);
        assert!(s.to_csv().contains("total_frames,max,20\n"));
        assert!(s.to_text().contains("items: 3"));

        let single = dataset_stats(&recs[..1]);
        for h in [&single.n_scenes, &single.total_frames, &single.option_counts] {
            assert_eq!(h.buckets.len(), 1);
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            durations in proptest::collection::vec(1usize..6, 1..6),
            n_opts in 2usize..6,
            question in "\\PC{0,40}",
            seed in any::<u64>(),
        ) {
            let mut r = record("x", TaskId::Question(QuestionKind::R2), durations, n_opts);
            r.question = question;
            r.seed = seed;
            r.answer = n_opts - 1;
            let mut buf = Vec::new();
            write_manifest_to(std::slice::from_ref(&r), &mut buf).unwrap();
            let back = parse_manifest(std::str::from_utf8(&buf).unwrap()).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
