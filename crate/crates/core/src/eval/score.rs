use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_answer, EvalError, ParsedAnswer, TaskId};
use crate::dataset::ManifestRecord;

/// Raw model output for one manifest item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub output: String,
    /// Set when the output could not be obtained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn new(id: impl Into<String>, output: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            output: output.into(),
            error: None,
        }
    }
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_predictions(predictions: &[PredictionRecord], path: &Path) -> Result<(), EvalError> {
    let io_err = |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for p in predictions {
        serde_json::to_writer(&mut w, p).map_err(|e| io_err(e.into()))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Chance accuracy (percent) per task and overall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceLevels {
    pub per_task: BTreeMap<TaskId, f64>,
    /// Unweighted mean over tasks.
    pub macro_chance: f64,
    /// Mean over all items.
    pub micro_chance: f64,
}

/// Expected accuracy of a uniform random answerer: `100 / options` per
/// item, averaged within each task, then across tasks.
pub fn chance_level(records: &[ManifestRecord]) -> ChanceLevels {
    let mut sums: BTreeMap<TaskId, (f64, usize)> = BTreeMap::new();
    let mut total = 0.0;
    for r in records {
        let c = 100.0 / r.options.len() as f64;
        let e = sums.entry(r.task).or_default();
        e.0 += c;
        e.1 += 1;
        total += c;
    }
    let per_task: BTreeMap<TaskId, f64> = sums.into_iter().map(|(t, (s, n))| (t, s / n as f64)).collect();
    ChanceLevels {
        macro_chance: mean(per_task.values().copied()),
        micro_chance: if records.is_empty() {
            0.0
        } else {
            total / records.len() as f64
        },
        per_task,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task: TaskId,
    pub n_items: usize,
    pub n_correct: usize,
    /// Percent.
    pub accuracy: f64,
    /// Percent.
    pub chance: f64,
    pub n_unparseable: usize,
    pub n_missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Ordered by task.
    pub tasks: Vec<TaskScore>,
    pub micro_accuracy: f64,
    pub macro_accuracy: f64,
    pub micro_chance: f64,
    pub macro_chance: f64,
    pub n_unparseable: usize,
    pub n_missing: usize,
    /// Prediction ids with no manifest entry; ignored in scoring.
    pub warnings: Vec<String>,
}

impl ScoreReport {
    pub fn task(&self, task: TaskId) -> Option<&TaskScore> {
        self.tasks.iter().find(|t| t.task == task)
    }

    pub fn n_items(&self) -> usize {
        self.tasks.iter().map(|t| t.n_items).sum()
    }

    pub fn n_correct(&self) -> usize {
        self.tasks.iter().map(|t| t.n_correct).sum()
    }
}

/// Scores `predictions` against `manifest`.
///
/// An item is correct iff its output parses to the recorded answer index.
/// Missing and unparseable outputs count as wrong and are tallied.
pub fn score(manifest: &[ManifestRecord], predictions: &[PredictionRecord]) -> Result<ScoreReport, EvalError> {
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.id.clone()));
        }
    }

    #[derive(Default)]
    struct Tally {
        items: usize,
        correct: usize,
        unparseable: usize,
        missing: usize,
    }
    let mut tallies: BTreeMap<TaskId, Tally> = BTreeMap::new();
    let mut known: HashMap<&str, ()> = HashMap::with_capacity(manifest.len());
    for r in manifest {
        known.insert(r.id.as_str(), ());
        let t = tallies.entry(r.task).or_default();
        t.items += 1;
        match by_id.get(r.id.as_str()) {
            None => t.missing += 1,
            Some(p) => match parse_answer(&p.output, &r.options) {
                ParsedAnswer::Index(i) if i == r.answer => t.correct += 1,
                ParsedAnswer::Index(_) => {}
                ParsedAnswer::Unparseable => t.unparseable += 1,
            },
        }
    }
    let warnings = predictions
        .iter()
        .filter(|p| !known.contains_key(p.id.as_str()))
        .map(|p| format!("prediction {} has no manifest entry", p.id))
        .collect();

    let chance = chance_level(manifest);
    let tasks: Vec<TaskScore> = tallies
        .into_iter()
        .map(|(task, t)| TaskScore {
            task,
            n_items: t.items,
            n_correct: t.correct,
            accuracy: 100.0 * t.correct as f64 / t.items as f64,
            chance: chance.per_task[&task],
            n_unparseable: t.unparseable,
            n_missing: t.missing,
        })
        .collect();
    let items: usize = tasks.iter().map(|t| t.n_items).sum();
    let correct: usize = tasks.iter().map(|t| t.n_correct).sum();
    Ok(ScoreReport {
        micro_accuracy: if items == 0 {
            0.0
        } else {
            100.0 * correct as f64 / items as f64
        },
        macro_accuracy: mean(tasks.iter().map(|t| t.accuracy)),
        micro_chance: chance.micro_chance,
        macro_chance: chance.macro_chance,
        n_unparseable: tasks.iter().map(|t| t.n_unparseable).sum(),
        n_missing: tasks.iter().map(|t| t.n_missing).sum(),
        tasks,
        warnings,
    })
}
