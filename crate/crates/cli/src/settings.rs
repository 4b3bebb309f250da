//! Flat `key = value` run configuration. Command-line flags win over the file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use pvqa_core::pseudo_video::FrameFormat;
use pvqa_core::{AffineBounds, GenerationConfig, QuestionKind};

use crate::args::GenArgs;
use crate::Usage;

/// Name of the resolved configuration written next to a generated manifest.
pub const RUN_CONFIG: &str = "run_config.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<String>,
    pub image_root: Option<PathBuf>,
    pub count: Option<u64>,
    pub max_scenes: Option<usize>,
    pub max_frames: Option<usize>,
    pub mix: Option<String>,
    pub resolution: Option<u32>,
    pub spec_only: Option<bool>,
    pub lossless: Option<bool>,
    pub rotation_step_deg: Option<f64>,
    pub rotation_clamp_deg: Option<f64>,
    pub scale_step: Option<f64>,
    pub scale_min: Option<f64>,
    pub scale_max: Option<f64>,
    pub translation_step: Option<f64>,
    pub translation_clamp: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())).into())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).context("serializing run config")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Coco,
    Generic,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Usage;

    fn from_str(s: &str) -> Result<Self, Usage> {
        match s {
            "coco" => Ok(Self::Coco),
            "generic" | "jsonl" => Ok(Self::Generic),
            other => Err(Usage(format!(
                "unknown corpus format {other:?}; expected coco or generic"
            ))),
        }
    }
}

/// Corpus location after merging flags and file.
#[derive(Debug, Clone)]
pub struct CorpusSource {
    pub path: PathBuf,
    pub format: CorpusFormat,
    pub image_root: PathBuf,
}

/// Parses `R1:2,R3:1`; a bare kind gets weight 1 and `all` means every kind.
pub fn parse_mix(text: &str) -> Result<Vec<(QuestionKind, f64)>, Usage> {
    let mut mix: Vec<(QuestionKind, f64)> = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, weight) = match part.split_once(':') {
            Some((n, w)) => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| Usage(format!("bad weight in mix entry {part:?}")))?;
                (n.trim(), w)
            }
            None => (part, 1.0),
        };
        if name.eq_ignore_ascii_case("all") {
            mix.extend(QuestionKind::ALL.iter().map(|k| (*k, weight)));
            continue;
        }
        let kind: QuestionKind = name
            .parse()
            .map_err(|_| Usage(format!("unknown question kind {name:?}")))?;
        if mix.iter().any(|(k, _)| *k == kind) {
            return Err(Usage(format!("{kind} listed twice in mix")));
        }
        mix.push((kind, weight));
    }
    if mix.is_empty() {
        return Err(Usage("question mix is empty".into()));
    }
    Ok(mix)
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Everything `generate` and `verify` need, resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub generation: GenerationConfig,
    pub corpus: Option<CorpusSource>,
    pub count: u64,
    pub spec_only: bool,
    /// The merged values, for writing next to the output.
    pub file: FileConfig,
}

pub fn resolve(args: &GenArgs, seed: Option<u64>, file: &FileConfig) -> Result<Resolved> {
    let d = GenerationConfig::default();
    let b = AffineBounds::default();
    let mix_text = pick(args.mix.clone(), file.mix.clone(), "R1".into());
    let lossless = args.lossless || file.lossless.unwrap_or(false);
    let spec_only = args.spec_only || file.spec_only.unwrap_or(false);

    let merged = FileConfig {
        seed: Some(pick(seed, file.seed, 0)),
        out: None,
        jobs: None,
        corpus: args.corpus.clone().or_else(|| file.corpus.clone()),
        corpus_format: Some(pick(
            args.corpus_format.clone(),
            file.corpus_format.clone(),
            "coco".into(),
        )),
        image_root: args.image_root.clone().or_else(|| file.image_root.clone()),
        count: Some(pick(args.count, file.count, 1)),
        max_scenes: Some(pick(args.max_scenes, file.max_scenes, d.max_scenes)),
        max_frames: Some(pick(args.max_frames, file.max_frames, d.max_frames_per_scene)),
        mix: Some(mix_text),
        resolution: Some(pick(args.resolution, file.resolution, d.output_resolution)),
        spec_only: Some(spec_only),
        lossless: Some(lossless),
        rotation_step_deg: Some(pick(
            args.rotation_step_deg,
            file.rotation_step_deg,
            b.rotation_step_deg,
        )),
        rotation_clamp_deg: Some(pick(
            args.rotation_clamp_deg,
            file.rotation_clamp_deg,
            b.rotation_clamp_deg,
        )),
        scale_step: Some(pick(args.scale_step, file.scale_step, b.scale_step)),
        scale_min: Some(pick(args.scale_min, file.scale_min, b.scale_clamp.0)),
        scale_max: Some(pick(args.scale_max, file.scale_max, b.scale_clamp.1)),
        translation_step: Some(pick(
            args.translation_step,
            file.translation_step,
            b.translation_step_frac,
        )),
        translation_clamp: Some(pick(
            args.translation_clamp,
            file.translation_clamp,
            b.translation_clamp_frac,
        )),
    };

    let count = merged.count.unwrap_or(1);
    if count == 0 {
        return Err(Usage("count must be at least 1".into()).into());
    }
    let generation = GenerationConfig {
        max_scenes: merged.max_scenes.unwrap_or(d.max_scenes),
        max_frames_per_scene: merged.max_frames.unwrap_or(d.max_frames_per_scene),
        output_resolution: merged.resolution.unwrap_or(d.output_resolution),
        affine_bounds: AffineBounds {
            rotation_step_deg: merged.rotation_step_deg.unwrap_or(b.rotation_step_deg),
            rotation_clamp_deg: merged.rotation_clamp_deg.unwrap_or(b.rotation_clamp_deg),
            scale_step: merged.scale_step.unwrap_or(b.scale_step),
            scale_clamp: (
                merged.scale_min.unwrap_or(b.scale_clamp.0),
                merged.scale_max.unwrap_or(b.scale_clamp.1),
            ),
            translation_step_frac: merged.translation_step.unwrap_or(b.translation_step_frac),
            translation_clamp_frac: merged.translation_clamp.unwrap_or(b.translation_clamp_frac),
        },
        master_seed: merged.seed.unwrap_or(0),
        question_mix: parse_mix(merged.mix.as_deref().unwrap_or("R1"))?,
        frame_format: if lossless {
            FrameFormat::Lossless
        } else {
            FrameFormat::Jpeg
        },
    };
    generation.validate().map_err(|e| Usage(e.to_string()))?;

    let corpus = match &merged.corpus {
        Some(path) => {
            let format: CorpusFormat = merged.corpus_format.as_deref().unwrap_or("coco").parse()?;
            let image_root = merged
                .image_root
                .clone()
                .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
            Some(CorpusSource {
                path: path.clone(),
                format,
                image_root,
            })
        }
        None => None,
    };

    Ok(Resolved {
        generation,
        corpus,
        count,
        spec_only,
        file: merged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_forms() {
        assert_eq!(parse_mix("R1").unwrap(), vec![(QuestionKind::R1, 1.0)]);
        assert_eq!(
            parse_mix("R1:2, a2:0.5").unwrap(),
            vec![(QuestionKind::R1, 2.0), (QuestionKind::A2, 0.5)]
        );
        assert_eq!(parse_mix("all").unwrap().len(), 6);
        assert!(parse_mix("R1,R1").is_err());
        assert!(parse_mix("R9").is_err());
        assert!(parse_mix("R1:x").is_err());
        assert!(parse_mix("").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("seed = 7\nmax_scenes = 3\nmix = \"R2\"\n# note\ncount = 5\n").unwrap();
        let args = GenArgs {
            max_scenes: Some(6),
            ..Default::default()
        };
        let r = resolve(&args, None, &file).unwrap();
        assert_eq!(r.generation.master_seed, 7);
        assert_eq!(r.generation.max_scenes, 6);
        assert_eq!(r.generation.question_mix, vec![(QuestionKind::R2, 1.0)]);
        assert_eq!(r.count, 5);
        let r = resolve(&args, Some(1), &file).unwrap();
        assert_eq!(r.generation.master_seed, 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("max_scene = 3").is_err());
    }

    #[test]
    fn saved_config_reloads_identically() {
        let args = GenArgs {
            mix: Some("R1:1,A1:2".into()),
            ..Default::default()
        };
        let r = resolve(&args, Some(3), &FileConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(RUN_CONFIG);
        r.file.save(&path).unwrap();
        let again = resolve(&GenArgs::default(), None, &FileConfig::load(&path).unwrap()).unwrap();
        assert_eq!(again.generation, r.generation);
    }

    #[test]
    fn invalid_generation_config_is_usage() {
        let args = GenArgs {
            max_scenes: Some(1),
            mix: Some("R1".into()),
            ..Default::default()
        };
        let err = resolve(&args, None, &FileConfig::default()).unwrap_err();
        assert!(err.downcast_ref::<Usage>().is_some());
    }
}
