//! Pseudo-video structure: scene selection, durations and per-frame affine
//! drift, plus the frame permutation used by shuffled-frame evaluation.

mod affine;
mod render;

pub use affine::{sample_affine_walk, AffineBounds, AffineParams};
pub use render::{frame_path, render_frames, warp, FrameFormat, RenderError};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::question::QuestionKind;
use crate::seed::{self, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("max_scenes must be at least 1")]
    NoScenes,
    #[error("max_frames_per_scene must be at least 1")]
    NoFrames,
    #[error("output_resolution must be at least 1")]
    NoResolution,
    #[error("question mix is empty")]
    EmptyMix,
    #[error("weight for {kind} must be positive and finite, got {weight}")]
    BadWeight { kind: QuestionKind, weight: f64 },
    #[error("{kind} needs at least {needed} scenes but max_scenes is {max_scenes}")]
    TooFewScenes {
        kind: QuestionKind,
        needed: usize,
        max_scenes: usize,
    },
    #[error("invalid affine bounds: {0}")]
    Affine(String),
}

/// All sampling knobs for one generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    /// Upper bound S on the number of scenes.
    pub max_scenes: usize,
    /// Upper bound F on frames per scene.
    pub max_frames_per_scene: usize,
    /// Side length of the square output frames.
    pub output_resolution: u32,
    pub affine_bounds: AffineBounds,
    pub master_seed: u64,
    pub question_mix: Vec<(QuestionKind, f64)>,
    pub frame_format: FrameFormat,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            max_scenes: 4,
            max_frames_per_scene: 5,
            output_resolution: 336,
            affine_bounds: AffineBounds::default(),
            master_seed: 0,
            question_mix: vec![(QuestionKind::R1, 1.0)],
            frame_format: FrameFormat::Jpeg,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_scenes < 1 {
            return Err(ConfigError::NoScenes);
        }
        if self.max_frames_per_scene < 1 {
            return Err(ConfigError::NoFrames);
        }
        if self.output_resolution < 1 {
            return Err(ConfigError::NoResolution);
        }
        if self.question_mix.is_empty() {
            return Err(ConfigError::EmptyMix);
        }
        for &(kind, weight) in &self.question_mix {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(ConfigError::BadWeight { kind, weight });
            }
            if self.max_scenes < kind.min_scenes() {
                return Err(ConfigError::TooFewScenes {
                    kind,
                    needed: kind.min_scenes(),
                    max_scenes: self.max_scenes,
                });
            }
        }
        self.affine_bounds.validate().map_err(ConfigError::Affine)
    }
}

/// One scene: a single corpus image held for `duration_frames` frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub scene_index: usize,
    pub sample_id: String,
    pub caption: String,
    pub duration_frames: usize,
    pub affine_track: Vec<AffineParams>,
}

/// Full blueprint of one pseudo video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoVideoSpec {
    pub video_id: String,
    pub scenes: Vec<SceneSpec>,
    pub total_frames: usize,
    pub scene_boundaries: Vec<usize>,
    pub item_seed: u64,
    /// The S this video was sampled under; numeric distractors draw from it.
    pub max_scenes: usize,
}

impl PseudoVideoSpec {
    /// Assembles a spec from scenes, filling in indices, boundaries and the
    /// frame total.
    pub fn from_scenes(
        video_id: impl Into<String>,
        mut scenes: Vec<SceneSpec>,
        item_seed: u64,
        max_scenes: usize,
    ) -> Self {
        let mut boundaries = Vec::with_capacity(scenes.len());
        let mut total = 0;
        for (i, scene) in scenes.iter_mut().enumerate() {
            scene.scene_index = i;
            boundaries.push(total);
            total += scene.duration_frames;
        }
        Self {
            video_id: video_id.into(),
            scenes,
            total_frames: total,
            scene_boundaries: boundaries,
            item_seed,
            max_scenes,
        }
    }

    pub fn n_scenes(&self) -> usize {
        self.scenes.len()
    }

    pub fn durations(&self) -> Vec<usize> {
        self.scenes.iter().map(|s| s.duration_frames).collect()
    }

    pub fn captions(&self) -> Vec<&str> {
        self.scenes.iter().map(|s| s.caption.as_str()).collect()
    }
}

/// Stable video id for an item index.
pub fn video_id_for(item_index: u64) -> String {
    format!("pv{item_index:07}")
}

/// Samples the structure of item `item_index`.
///
/// The scene count is uniform over `kind.min_scenes()..=S`, each duration is
/// uniform over `1..=F`, and scenes are drawn with distinct captions. The
/// result depends only on `(config, kind, corpus, item_index)`.
pub fn sample_structure(
    config: &GenerationConfig,
    kind: QuestionKind,
    corpus: &Corpus,
    item_index: u64,
) -> Result<PseudoVideoSpec, CorpusError> {
    let item_seed = seed::item_seed(config.master_seed, item_index);
    sample_structure_seeded(config, kind, corpus, &video_id_for(item_index), item_seed)
}

/// Like [`sample_structure`] but from an explicit item seed, which is how
/// recorded items are regenerated.
pub fn sample_structure_seeded(
    config: &GenerationConfig,
    kind: QuestionKind,
    corpus: &Corpus,
    video_id: &str,
    item_seed: u64,
) -> Result<PseudoVideoSpec, CorpusError> {
    let mut rng = seed::stream_rng(item_seed, Stream::Structure);
    let lo = kind.min_scenes();
    let hi = config.max_scenes.max(lo);
    let n = rng.random_range(lo..=hi);
    let samples = corpus.sample_distinct(n, &mut rng)?;
    let durations: Vec<usize> = (0..n)
        .map(|_| rng.random_range(1..=config.max_frames_per_scene))
        .collect();
    let scenes = samples
        .into_iter()
        .zip(durations)
        .enumerate()
        .map(|(i, (sample, duration))| SceneSpec {
            scene_index: i,
            sample_id: sample.sample_id.clone(),
            caption: sample.caption.clone(),
            duration_frames: duration,
            affine_track: sample_affine_walk(duration, &config.affine_bounds, &mut rng),
        })
        .collect();
    Ok(PseudoVideoSpec::from_scenes(
        video_id,
        scenes,
        item_seed,
        config.max_scenes,
    ))
}

/// A uniformly random permutation of `0..n_frames`, never the identity when
/// `n_frames >= 2`. `perm[i]` is the original index shown at position `i`.
pub fn permute_frames<R: Rng + ?Sized>(n_frames: usize, rng: &mut R) -> Vec<usize> {
    assert!(n_frames >= 1, "permute_frames needs at least one frame");
    let mut perm: Vec<usize> = (0..n_frames).collect();
    if n_frames == 1 {
        return perm;
    }
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            return perm;
        }
    }
}
