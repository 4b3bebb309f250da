use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::question::QuestionKind;

/// A TVBench task or one of the generated question kinds.
///
/// Ordering follows the benchmark's column order, then the question kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskId {
    /// Action Count
    AC,
    /// Object Count
    OC,
    /// Action Sequence
    AS,
    /// Object Shuffle
    OS,
    /// Scene Transition
    ST,
    /// Action Localization
    AL,
    /// Action Antonym
    AA,
    /// Unexpected Action
    UA,
    /// Egocentric Sequence
    ES,
    /// Moving Direction
    MD,
    Question(QuestionKind),
}

impl TaskId {
    pub const TVBENCH: [TaskId; 10] = [
        Self::AC,
        Self::OC,
        Self::AS,
        Self::OS,
        Self::ST,
        Self::AL,
        Self::AA,
        Self::UA,
        Self::ES,
        Self::MD,
    ];

    /// Options per TVBench question (100 / its published chance level).
    pub fn tvbench_option_count(self) -> Option<usize> {
        match self {
            Self::AC | Self::OC | Self::AL | Self::UA | Self::ES | Self::MD => Some(4),
            Self::AS | Self::ST | Self::AA => Some(2),
            Self::OS => Some(3),
            Self::Question(_) => None,
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            Self::AC => "AC",
            Self::OC => "OC",
            Self::AS => "AS",
            Self::OS => "OS",
            Self::ST => "ST",
            Self::AL => "AL",
            Self::AA => "AA",
            Self::UA => "UA",
            Self::ES => "ES",
            Self::MD => "MD",
            Self::Question(k) => k.as_str(),
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            Self::AC => "Action Count",
            Self::OC => "Object Count",
            Self::AS => "Action Sequence",
            Self::OS => "Object Shuffle",
            Self::ST => "Scene Transition",
            Self::AL => "Action Localization",
            Self::AA => "Action Antonym",
            Self::UA => "Unexpected Action",
            Self::ES => "Egocentric Sequence",
            Self::MD => "Moving Direction",
            Self::Question(k) => match k {
                QuestionKind::R1 => "Scene Order",
                QuestionKind::R2 => "Before or After",
                QuestionKind::R3 => "First or Last",
                QuestionKind::R4 => "Adjacent Scene",
                QuestionKind::A1 => "Scene Count",
                QuestionKind::A2 => "Scene at Position",
            },
        }
    }
}

impl From<QuestionKind> for TaskId {
    fn from(k: QuestionKind) -> Self {
        TaskId::Question(k)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task {0:?}")]
pub struct UnknownTask(pub String);

impl FromStr for TaskId {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(task) = Self::TVBENCH.into_iter().find(|t2| t2.abbreviation() == t) {
            return Ok(task);
        }
        t.parse::<QuestionKind>()
            .map(TaskId::Question)
            .map_err(|_| UnknownTask(s.to_string()))
    }
}

impl Serialize for TaskId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.abbreviation())
    }
}

impl<'de> Deserialize<'de> for TaskId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
