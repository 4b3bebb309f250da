//! Independent re-derivation of the correct option.
//!
//! Works from the scene timeline and the item's metadata only, testing each
//! option against the truth. Nothing here calls into the constructors.

use thiserror::Error;

use super::{Direction, Extremum, ItemMetadata, MCQItem, QuestionKind};
use crate::pseudo_video::PseudoVideoSpec;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("item {item_id}: {count} options verify as correct (expected exactly one)")]
    Integrity { item_id: String, count: usize },
    #[error("item {item_id}: caption {caption:?} is not a scene of the video")]
    UnknownCaption { item_id: String, caption: String },
    #[error("item {item_id}: metadata does not fit kind {kind}")]
    MetadataMismatch { item_id: String, kind: QuestionKind },
    #[error("item {item_id}: scene number {number} is out of range")]
    SceneOutOfRange { item_id: String, number: usize },
}

fn scene_of(spec: &PseudoVideoSpec, item: &MCQItem, caption: &str) -> Result<usize, OracleError> {
    spec.scenes
        .iter()
        .position(|s| s.caption == caption)
        .ok_or_else(|| OracleError::UnknownCaption {
            item_id: item.item_id.clone(),
            caption: caption.to_string(),
        })
}

/// Returns the single option index that is correct for `item` over `spec`.
pub fn oracle_verify(item: &MCQItem, spec: &PseudoVideoSpec) -> Result<usize, OracleError> {
    let captions: Vec<&str> = spec.scenes.iter().map(|s| s.caption.as_str()).collect();
    let n = captions.len();
    let mismatch = || OracleError::MetadataMismatch {
        item_id: item.item_id.clone(),
        kind: item.kind,
    };

    let truth: Box<dyn Fn(&str) -> bool> = match (&item.kind, &item.metadata) {
        (QuestionKind::R1, ItemMetadata::SceneOrder) => {
            let mut expected = String::new();
            for (i, c) in captions.iter().enumerate() {
                if i > 0 {
                    expected.push(' ');
                }
                expected.push_str(&format!("Scene {}: {}", i + 1, c));
            }
            Box::new(move |o| o == expected)
        }
        (
            QuestionKind::R2,
            ItemMetadata::BeforeAfter {
                first_caption,
                second_caption,
                ..
            },
        ) => {
            let a = scene_of(spec, item, first_caption)?;
            let b = scene_of(spec, item, second_caption)?;
            let answer = if a < b { "before" } else { "after" };
            Box::new(move |o| o == answer)
        }
        (
            QuestionKind::R3,
            ItemMetadata::Extremal {
                direction,
                listed_captions,
                ..
            },
        ) => {
            let mut positions = Vec::with_capacity(listed_captions.len());
            for c in listed_captions {
                positions.push((scene_of(spec, item, c)?, c.clone()));
            }
            let pick = match direction {
                Extremum::First => positions.iter().min_by_key(|(p, _)| *p),
                Extremum::Last => positions.iter().max_by_key(|(p, _)| *p),
            };
            let answer = pick.map(|(_, c)| c.clone()).unwrap_or_default();
            Box::new(move |o| o == answer)
        }
        (
            QuestionKind::R4,
            ItemMetadata::Adjacent {
                target_caption,
                direction,
                ..
            },
        ) => {
            let t = scene_of(spec, item, target_caption)? as isize;
            let neighbour = match direction {
                Direction::Before => t - 1,
                Direction::After => t + 1,
            };
            let answer = if neighbour < 0 || neighbour >= n as isize {
                match direction {
                    Direction::Before => {
                        "The given scene is the first scene in the video, so there is no scene before it.".to_string()
                    }
                    Direction::After => {
                        "The given scene is the last scene in the video, so there is no scene after it.".to_string()
                    }
                }
            } else {
                captions[neighbour as usize].to_string()
            };
            Box::new(move |o| o == answer)
        }
        (QuestionKind::A1, ItemMetadata::SceneCount) => Box::new(move |o| o.trim().parse::<usize>() == Ok(n)),
        (QuestionKind::A2, ItemMetadata::SceneAt { scene_number }) => {
            if *scene_number == 0 || *scene_number > n {
                return Err(OracleError::SceneOutOfRange {
                    item_id: item.item_id.clone(),
                    number: *scene_number,
                });
            }
            let answer = captions[scene_number - 1].to_string();
            Box::new(move |o| o == answer)
        }
        _ => return Err(mismatch()),
    };

    let hits: Vec<usize> = item
        .options
        .iter()
        .enumerate()
        .filter(|(_, o)| truth(o))
        .map(|(i, _)| i)
        .collect();
    match hits.as_slice() {
        [only] => Ok(*only),
        _ => Err(OracleError::Integrity {
            item_id: item.item_id.clone(),
            count: hits.len(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{make_question, make_r2, make_r4, sentinel_option};
    use super::*;
    use crate::seed::{stream_rng, Stream};

    #[test]
    fn agrees_with_every_constructor() {
        for n in 1..=7 {
            let caps = letters(n);
            let caps: Vec<&str> = caps.iter().map(String::as_str).collect();
            let spec = spec_with(&caps, 6);
            for kind in QuestionKind::ALL {
                if n < kind.min_scenes() {
                    continue;
                }
                for seed in 0..200 {
                    let item = make_question(&spec, kind, &mut stream_rng(seed, Stream::Question)).unwrap();
                    assert_eq!(
                        oracle_verify(&item, &spec).unwrap(),
                        item.answer_index,
                        "{kind} n={n} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn r2_brute_force() {
        let spec = spec_with(&["X", "Y"], 2);
        let mut rng = stream_rng(1, Stream::Question);
        for _ in 0..20 {
            let item = make_r2(&spec, &mut rng);
            assert_eq!(oracle_verify(&item, &spec).unwrap(), item.answer_index);
        }
    }

    #[test]
    fn duplicate_correct_options_are_an_integrity_error() {
        let spec = spec_with(&["X", "Y"], 2);
        let mut item = make_r2(&spec, &mut stream_rng(1, Stream::Question));
        let right = item.options[item.answer_index].clone();
        item.options = vec![right.clone(), right];
        assert!(matches!(
            oracle_verify(&item, &spec),
            Err(OracleError::Integrity { count: 2, .. })
        ));
    }

    #[test]
    fn r4_boundary_selects_sentinel() {
        let spec = spec_with(&["X", "Y", "Z"], 3);
        let mut rng = stream_rng(2, Stream::Question);
        let item = (0..500)
            .map(|_| make_r4(&spec, &mut rng))
            .find(|it| {
                matches!(
                    it.metadata,
                    ItemMetadata::Adjacent {
                        target_scene: 0,
                        direction: Direction::Before,
                        ..
                    }
                )
            })
            .unwrap();
        let idx = oracle_verify(&item, &spec).unwrap();
        assert_eq!(item.options[idx], sentinel_option(Direction::Before));
    }

    #[test]
    fn corrupted_answer_disagrees() {
        let spec = spec_with(&["X", "Y", "Z", "W"], 4);
        let mut item = make_question(&spec, QuestionKind::A1, &mut stream_rng(3, Stream::Question)).unwrap();
        let truth = oracle_verify(&item, &spec).unwrap();
        item.answer_index = (truth + 1) % item.options.len();
        assert_ne!(oracle_verify(&item, &spec).unwrap(), item.answer_index);
    }
}
