use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{default_frames, item_id_for, Direction, Extremum, ItemMetadata, MCQItem, QuestionKind};
use crate::pseudo_video::PseudoVideoSpec;

/// Wrong options used when the template does not force a different count.
const WRONG_OPTIONS: usize = 3;

const R1_STEM: &str = "Which of the following options best describes the order of scenes in the video?";
const A1_STEM: &str = "How many different scenes appear in the video?";

/// Option stating the queried scene has no neighbour in `direction`.
pub fn sentinel_option(direction: Direction) -> &'static str {
    match direction {
        Direction::Before => "The given scene is the first scene in the video, so there is no scene before it.",
        Direction::After => "The given scene is the last scene in the video, so there is no scene after it.",
    }
}

/// Puts the correct option at a uniformly drawn slot among shuffled wrong ones.
fn place<R: Rng + ?Sized>(correct: String, mut wrong: Vec<String>, rng: &mut R) -> (Vec<String>, usize) {
    wrong.shuffle(rng);
    let slot = rng.random_range(0..=wrong.len());
    wrong.insert(slot, correct);
    (wrong, slot)
}

/// `k` distinct elements of `pool`, uniformly without replacement.
fn choose<R: Rng + ?Sized, T: Clone>(pool: &[T], k: usize, rng: &mut R) -> Vec<T> {
    index::sample(rng, pool.len(), k.min(pool.len()))
        .into_iter()
        .map(|i| pool[i].clone())
        .collect()
}

fn item(
    spec: &PseudoVideoSpec,
    kind: QuestionKind,
    question: String,
    (options, answer_index): (Vec<String>, usize),
    metadata: ItemMetadata,
) -> MCQItem {
    MCQItem {
        item_id: item_id_for(&spec.video_id, kind),
        video_id: spec.video_id.clone(),
        kind,
        question,
        options,
        answer_index,
        n_scenes: spec.n_scenes(),
        frames: default_frames(spec),
        metadata,
    }
}

fn scene_listing(captions: &[&str], order: &[usize]) -> String {
    order
        .iter()
        .enumerate()
        .map(|(pos, &scene)| format!("Scene {}: {}", pos + 1, captions[scene]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Saturating `n! - 1`, the number of wrong scene orders.
fn wrong_orders(n: usize) -> usize {
    (2..=n)
        .try_fold(1usize, |acc, k| acc.checked_mul(k))
        .map_or(usize::MAX, |f| f - 1)
}

/// Scene ordering: the true order against up to three other permutations.
pub fn make_r1<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let captions = spec.captions();
    let n = captions.len();
    let identity: Vec<usize> = (0..n).collect();
    let wanted = WRONG_OPTIONS.min(wrong_orders(n));

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut wrong = Vec::with_capacity(wanted);
    let mut perm = identity.clone();
    while wrong.len() < wanted {
        perm.shuffle(rng);
        if perm != identity && seen.insert(perm.clone()) {
            wrong.push(scene_listing(&captions, &perm));
        }
    }
    let correct = scene_listing(&captions, &identity);
    item(
        spec,
        QuestionKind::R1,
        R1_STEM.to_string(),
        place(correct, wrong, rng),
        ItemMetadata::SceneOrder,
    )
}

/// Before/after between two distinct scenes.
pub fn make_r2<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let n = spec.n_scenes();
    let pair = index::sample(rng, n, 2);
    let (a, b) = (pair.index(0), pair.index(1));
    let (ca, cb) = (&spec.scenes[a].caption, &spec.scenes[b].caption);
    let question = format!(
        "In the given video, does the scene that can be captioned as \"{ca}\" happen before or after the scene that can be captioned as \"{cb}\"?"
    );
    let (correct, wrong) = if a < b {
        ("before", "after")
    } else {
        ("after", "before")
    };
    item(
        spec,
        QuestionKind::R2,
        question,
        place(correct.to_string(), vec![wrong.to_string()], rng),
        ItemMetadata::BeforeAfter {
            first_caption: ca.clone(),
            second_caption: cb.clone(),
            first_scene: a,
            second_scene: b,
        },
    )
}

/// Which of a listed subset of scenes occurs first or last.
///
/// The number of wrong options is drawn from {1, 2, 3} and capped by the
/// scene count; every listed caption is offered as an option.
pub fn make_r3<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let n = spec.n_scenes();
    let wrong_count = rng.random_range(1..=WRONG_OPTIONS).min(n - 1);
    let mut listed = index::sample(rng, n, wrong_count + 1).into_vec();
    listed.shuffle(rng);
    let direction = if rng.random_bool(0.5) {
        Extremum::First
    } else {
        Extremum::Last
    };

    let target = match direction {
        Extremum::First => *listed.iter().min().expect("non-empty"),
        Extremum::Last => *listed.iter().max().expect("non-empty"),
    };
    let listed_captions: Vec<String> = listed.iter().map(|&i| spec.scenes[i].caption.clone()).collect();
    let which = match direction {
        Extremum::First => "first",
        Extremum::Last => "last",
    };
    let question = format!(
        "The following scenes appear in the video, not necessarily in this order: {}. Of those scenes, which occurs {which}?",
        listed_captions.join(", ")
    );
    let wrong = listed
        .iter()
        .filter(|&&i| i != target)
        .map(|&i| spec.scenes[i].caption.clone())
        .collect();
    item(
        spec,
        QuestionKind::R3,
        question,
        place(spec.scenes[target].caption.clone(), wrong, rng),
        ItemMetadata::Extremal {
            direction,
            listed_captions,
            listed_scenes: listed,
        },
    )
}

/// The scene immediately before or after a given one.
///
/// The sentinel option is always offered; it is correct exactly when the
/// target is first and the question asks for "before", or last and asks for
/// "after". Other slots hold captions of scenes that are neither the target
/// nor its neighbour in the asked direction.
pub fn make_r4<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let n = spec.n_scenes();
    let target = rng.random_range(0..n);
    let direction = if rng.random_bool(0.5) {
        Direction::Before
    } else {
        Direction::After
    };
    let neighbour = match direction {
        Direction::Before => target.checked_sub(1),
        Direction::After => Some(target + 1).filter(|&i| i < n),
    };
    let pool: Vec<String> = (0..n)
        .filter(|&i| i != target && Some(i) != neighbour)
        .map(|i| spec.scenes[i].caption.clone())
        .collect();
    let sentinel = sentinel_option(direction).to_string();

    let (correct, wrong) = match neighbour {
        None => (sentinel, choose(&pool, WRONG_OPTIONS, rng)),
        Some(i) => {
            let mut wrong = vec![sentinel];
            wrong.extend(choose(&pool, WRONG_OPTIONS - 1, rng));
            (spec.scenes[i].caption.clone(), wrong)
        }
    };
    let target_caption = spec.scenes[target].caption.clone();
    let question = format!(
        "One of the scenes in the video can be described as \"{target_caption}\". Describe the scene immediately {} it.",
        direction.as_str()
    );
    item(
        spec,
        QuestionKind::R4,
        question,
        place(correct, wrong, rng),
        ItemMetadata::Adjacent {
            target_caption,
            target_scene: target,
            direction,
        },
    )
}

/// Scene count, with three wrong counts from `1..=max(S, n + 3)`.
pub fn make_a1<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let n = spec.n_scenes();
    let hi = spec.max_scenes.max(n + 3);
    let candidates: Vec<usize> = (1..=hi).filter(|&k| k != n).collect();
    let wrong = choose(&candidates, WRONG_OPTIONS, rng)
        .into_iter()
        .map(|k| k.to_string())
        .collect();
    item(
        spec,
        QuestionKind::A1,
        A1_STEM.to_string(),
        place(n.to_string(), wrong, rng),
        ItemMetadata::SceneCount,
    )
}

/// Caption of the scene at a 1-based position.
pub fn make_a2<R: Rng + ?Sized>(spec: &PseudoVideoSpec, rng: &mut R) -> MCQItem {
    let n = spec.n_scenes();
    let number = rng.random_range(1..=n);
    let others: Vec<String> = (0..n)
        .filter(|&i| i != number - 1)
        .map(|i| spec.scenes[i].caption.clone())
        .collect();
    let wrong = choose(&others, WRONG_OPTIONS, rng);
    let question = format!("There are {n} scenes in the video. What does scene {number} depict?");
    item(
        spec,
        QuestionKind::A2,
        question,
        place(spec.scenes[number - 1].caption.clone(), wrong, rng),
        ItemMetadata::SceneAt { scene_number: number },
    )
}
