//! Pseudo-video multiple-choice question answering toolkit.
//!
//! The crate has two halves. The generation side samples captioned images
//! from a [`corpus::Corpus`], arranges them into pseudo videos (each scene a
//! still image repeated for a few frames under a drifting affine warp), and
//! instantiates the six question templates over the known scene timeline.
//! The evaluation side parses model outputs, scores them per task against
//! chance level, and builds shuffled-frame variants of a manifest.
//!
//! Everything random is driven by seeds derived from a master seed and an
//! item index, so any item can be regenerated on its own.

pub mod corpus;
pub mod dataset;
pub mod eval;
pub mod pipeline;
pub mod pseudo_video;
pub mod question;
pub mod seed;

pub use corpus::{CaptionedSample, Corpus, CorpusError, ValidationReport};
pub use dataset::{DatasetStats, ManifestError, ManifestRecord};
pub use eval::{parse_answer, ParsedAnswer, PredictionRecord, ScoreReport, TaskId, TaskScore};
pub use pipeline::{GeneratedItem, VerifyReport};
pub use pseudo_video::{AffineBounds, AffineParams, GenerationConfig, PseudoVideoSpec, SceneSpec};
pub use question::{MCQItem, QuestionError, QuestionKind};
