//! Scoring, chance levels, shuffled-frame variants and remote inference.

mod infer;
mod parse;
mod report;
mod score;
mod shuffle;
mod task;

pub use infer::{infer_remote, infer_remote_blocking, EndpointConfig, ImageMode};
pub use parse::{parse_answer, ParsedAnswer};
pub use report::{fmt1, report_table, round1, ReportRow, ReportTable};
pub use score::{
    chance_level, read_predictions, score, write_predictions, ChanceLevels, PredictionRecord, ScoreReport, TaskScore,
};
pub use shuffle::{make_shuffled_variant, variant_permutation};
pub use task::{TaskId, UnknownTask};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed prediction: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate prediction id {0:?}")]
    DuplicatePrediction(String),
    #[error("environment variable {0} with the endpoint token is not set")]
    MissingToken(String),
    #[error("cannot build HTTP client: {0}")]
    Client(String),
    #[error("endpoint failed for {failed} of {total} items")]
    TooManyFailures {
        failed: usize,
        total: usize,
        partial: Vec<PredictionRecord>,
    },
}
