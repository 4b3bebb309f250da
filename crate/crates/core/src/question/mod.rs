//! The six question templates, their answer oracle, and prompt rendering.
//!
//! Relative kinds (R1-R4) ask about ordering between scenes; absolute kinds
//! (A1, A2) ask for a scene count or the content at a given position.

mod oracle;
mod prompt;
mod templates;

pub use oracle::{oracle_verify, OracleError};
pub use prompt::{option_letter, render_prompt, render_prompt_parts, ANSWER_INSTRUCTION};
pub use templates::{make_a1, make_a2, make_r1, make_r2, make_r3, make_r4, sentinel_option};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pseudo_video::{frame_path, FrameFormat, PseudoVideoSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionKind {
    R1,
    R2,
    R3,
    R4,
    A1,
    A2,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 6] = [Self::R1, Self::R2, Self::R3, Self::R4, Self::A1, Self::A2];

    /// Fewest scenes for which the question is not trivial.
    pub fn min_scenes(self) -> usize {
        match self {
            Self::A1 => 1,
            _ => 2,
        }
    }

    pub fn is_relative(self) -> bool {
        matches!(self, Self::R1 | Self::R2 | Self::R3 | Self::R4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R3 => "R3",
            Self::R4 => "R4",
            Self::A1 => "A1",
            Self::A2 => "A2",
        }
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionKind {
    type Err = QuestionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| QuestionError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    First,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Before,
    After,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Before => "before",
            Direction::After => "after",
        }
    }
}

/// What a question asked about, beyond its text. Scene indices are 0-based
/// except `SceneAt::scene_number`, which is the 1-based number in the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ItemMetadata {
    SceneOrder,
    BeforeAfter {
        first_caption: String,
        second_caption: String,
        first_scene: usize,
        second_scene: usize,
    },
    Extremal {
        direction: Extremum,
        listed_captions: Vec<String>,
        listed_scenes: Vec<usize>,
    },
    Adjacent {
        target_caption: String,
        target_scene: usize,
        direction: Direction,
    },
    SceneCount,
    SceneAt {
        scene_number: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCQItem {
    pub item_id: String,
    pub video_id: String,
    pub kind: QuestionKind,
    pub question: String,
    pub options: Vec<String>,
    pub answer_index: usize,
    pub n_scenes: usize,
    pub frames: Vec<String>,
    pub metadata: ItemMetadata,
}

#[derive(Debug, Error, PartialEq)]
pub enum QuestionError {
    #[error("{kind} needs at least {needed} scenes, video has {actual}")]
    TooFewScenes {
        kind: QuestionKind,
        needed: usize,
        actual: usize,
    },
    #[error("unknown question kind {0:?}")]
    UnknownKind(String),
    #[error("item {item_id} has duplicate options")]
    DuplicateOptions { item_id: String },
    #[error("{0} options exceed the 26 available letters")]
    TooManyOptions(usize),
}

pub fn item_id_for(video_id: &str, kind: QuestionKind) -> String {
    format!("{video_id}-{kind}")
}

/// Instantiates `kind` over `spec`. Frame paths use the JPEG layout.
pub fn make_question<R: Rng + ?Sized>(
    spec: &PseudoVideoSpec,
    kind: QuestionKind,
    rng: &mut R,
) -> Result<MCQItem, QuestionError> {
    let n = spec.n_scenes();
    if n < kind.min_scenes() {
        return Err(QuestionError::TooFewScenes {
            kind,
            needed: kind.min_scenes(),
            actual: n,
        });
    }
    let item = match kind {
        QuestionKind::R1 => make_r1(spec, rng),
        QuestionKind::R2 => make_r2(spec, rng),
        QuestionKind::R3 => make_r3(spec, rng),
        QuestionKind::R4 => make_r4(spec, rng),
        QuestionKind::A1 => make_a1(spec, rng),
        QuestionKind::A2 => make_a2(spec, rng),
    };
    let mut seen = std::collections::HashSet::new();
    if !item.options.iter().all(|o| seen.insert(o.as_str())) {
        return Err(QuestionError::DuplicateOptions { item_id: item.item_id });
    }
    Ok(item)
}

pub(crate) fn default_frames(spec: &PseudoVideoSpec) -> Vec<String> {
    (0..spec.total_frames)
        .map(|i| frame_path(&spec.video_id, i, FrameFormat::Jpeg))
        .collect()
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::seed::{stream_rng, Stream};

    #[test]
    fn kind_round_trip() {
        for k in QuestionKind::ALL {
            assert_eq!(k.as_str().parse::<QuestionKind>().unwrap(), k);
        }
        assert!("R9".parse::<QuestionKind>().is_err());
        assert!(QuestionKind::R4.is_relative());
        assert!(!QuestionKind::A2.is_relative());
    }

    #[test]
    fn r2_dispatch_has_before_after() {
        let caps = letters(3);
        let caps: Vec<&str> = caps.iter().map(String::as_str).collect();
        let spec = spec_with(&caps, 3);
        let item = make_question(&spec, QuestionKind::R2, &mut stream_rng(0, Stream::Question)).unwrap();
        let mut opts = item.options.clone();
        opts.sort();
        assert_eq!(opts, vec!["after", "before"]);
    }

    #[test]
    fn single_scene_r1_is_rejected() {
        let spec = spec_with(&["only"], 1);
        let err = make_question(&spec, QuestionKind::R1, &mut stream_rng(0, Stream::Question)).unwrap_err();
        assert_eq!(
            err,
            QuestionError::TooFewScenes {
                kind: QuestionKind::R1,
                needed: 2,
                actual: 1
            }
        );
    }

    #[test]
    fn same_seed_same_item() {
        let caps = letters(5);
        let caps: Vec<&str> = caps.iter().map(String::as_str).collect();
        let spec = spec_with(&caps, 5);
        for kind in QuestionKind::ALL {
            let a = make_question(&spec, kind, &mut stream_rng(11, Stream::Question)).unwrap();
            let b = make_question(&spec, kind, &mut stream_rng(11, Stream::Question)).unwrap();
            assert_eq!(a, b);
        }
    }
}
