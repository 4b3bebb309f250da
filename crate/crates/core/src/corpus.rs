//! Captioned-image corpora: loading, validation and distinct-caption sampling.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed annotation file at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("annotations reference unknown image ids: {ids:?}")]
    UnknownImages { ids: Vec<u64> },
    #[error("line {line}: missing field {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("duplicate sample id {id:?}")]
    DuplicateId { id: String },
    #[error("requested {requested} distinct captions but only {available} are available")]
    Capacity { requested: usize, available: usize },
}

/// Lowercase, trim and collapse whitespace runs to a single space.
pub fn normalize_caption(caption: &str) -> String {
    caption.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// One image paired with its caption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionedSample {
    pub sample_id: String,
    /// Relative to the corpus image root.
    pub image_path: PathBuf,
    pub caption: String,
    pub normalized_caption: String,
}

impl CaptionedSample {
    pub fn new(sample_id: impl Into<String>, image_path: impl Into<PathBuf>, caption: impl Into<String>) -> Self {
        let caption = caption.into();
        let normalized_caption = normalize_caption(&caption);
        Self {
            sample_id: sample_id.into(),
            image_path: image_path.into(),
            caption,
            normalized_caption,
        }
    }
}

/// An immutable, ordered collection of captioned samples.
#[derive(Debug, Clone)]
pub struct Corpus {
    samples: Vec<CaptionedSample>,
    image_root: PathBuf,
    by_id: HashMap<String, usize>,
    distinct_captions: usize,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate sample ids.
    pub fn new(samples: Vec<CaptionedSample>, image_root: impl Into<PathBuf>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            if by_id.insert(s.sample_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId {
                    id: s.sample_id.clone(),
                });
            }
        }
        let distinct_captions = samples
            .iter()
            .filter(|s| !s.normalized_caption.is_empty())
            .map(|s| s.normalized_caption.as_str())
            .collect::<HashSet<_>>()
            .len();
        Ok(Self {
            samples,
            image_root: image_root.into(),
            by_id,
            distinct_captions,
        })
    }

    pub fn samples(&self) -> &[CaptionedSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn image_root(&self) -> &Path {
        &self.image_root
    }

    pub fn get(&self, sample_id: &str) -> Option<&CaptionedSample> {
        self.by_id.get(sample_id).map(|&i| &self.samples[i])
    }

    pub fn resolve_image(&self, sample: &CaptionedSample) -> PathBuf {
        self.image_root.join(&sample.image_path)
    }

    /// Number of distinct non-empty normalized captions, i.e. the largest
    /// `k` that [`Corpus::sample_distinct`] can satisfy.
    pub fn distinct_caption_count(&self) -> usize {
        self.distinct_captions
    }

    /// Loads a COCO captions annotation file.
    ///
    /// One sample per image, ordered by ascending image id. When an image
    /// carries several captions the one with the lowest annotation id wins.
    /// Images without any caption are kept with an empty caption so that
    /// [`Corpus::validate`] can report them.
    pub fn load_coco_captions(annotation_path: &Path, image_root: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(annotation_path).map_err(|source| CorpusError::Io {
            path: annotation_path.to_path_buf(),
            source,
        })?;
        Self::from_coco_str(&text, image_root)
    }

    pub fn from_coco_str(text: &str, image_root: &Path) -> Result<Self, CorpusError> {
        #[derive(Deserialize)]
        struct CocoImage {
            id: u64,
            file_name: String,
        }
        #[derive(Deserialize)]
        struct CocoAnnotation {
            id: u64,
            image_id: u64,
            caption: String,
        }
        #[derive(Deserialize)]
        struct CocoFile {
            images: Vec<CocoImage>,
            #[serde(default)]
            annotations: Vec<CocoAnnotation>,
        }

        let parsed: CocoFile = serde_json::from_str(text).map_err(|e| CorpusError::Parse {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })?;

        let mut images: BTreeMap<u64, (String, Option<(u64, String)>)> = BTreeMap::new();
        for img in parsed.images {
            images.insert(img.id, (img.file_name, None));
        }

        let mut unknown = Vec::new();
        for ann in parsed.annotations {
            match images.get_mut(&ann.image_id) {
                Some((_, best)) => {
                    if best.as_ref().is_none_or(|(id, _)| ann.id < *id) {
                        *best = Some((ann.id, ann.caption));
                    }
                }
                None => unknown.push(ann.image_id),
            }
        }
        if !unknown.is_empty() {
            unknown.sort_unstable();
            unknown.dedup();
            return Err(CorpusError::UnknownImages { ids: unknown });
        }

        let samples = images
            .into_iter()
            .map(|(id, (file_name, best))| {
                let caption = best.map(|(_, c)| c).unwrap_or_default();
                CaptionedSample::new(id.to_string(), file_name, caption)
            })
            .collect();
        Self::new(samples, image_root)
    }

    /// Loads a line-delimited manifest with `id`, `image` and `caption` keys.
    pub fn load_generic(manifest_path: &Path, image_root: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(manifest_path).map_err(|source| CorpusError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })?;
        Self::from_generic_str(&text, image_root)
    }

    pub fn from_generic_str(text: &str, image_root: &Path) -> Result<Self, CorpusError> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        // a final LF yields one empty tail; one extra blank line is tolerated
        if lines.last() == Some(&"") {
            lines.pop();
        }
        if lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }

        let mut samples = Vec::with_capacity(lines.len());
        let mut seen = HashSet::new();
        for (i, line) in lines.iter().enumerate() {
            let line_no = i + 1;
            let value: serde_json::Value = serde_json::from_str(line).map_err(|e| CorpusError::BadLine {
                line: line_no,
                message: e.to_string(),
            })?;
            let obj = value.as_object().ok_or_else(|| CorpusError::BadLine {
                line: line_no,
                message: "record is not an object".into(),
            })?;
            let field = |name: &'static str| -> Result<String, CorpusError> {
                match obj.get(name) {
                    None | Some(serde_json::Value::Null) => Err(CorpusError::MissingField {
                        line: line_no,
                        field: name,
                    }),
                    Some(serde_json::Value::String(s)) => Ok(s.clone()),
                    Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
                    Some(_) => Err(CorpusError::BadLine {
                        line: line_no,
                        message: format!("field {name} must be a string"),
                    }),
                }
            };
            let id = field("id")?;
            let image = field("image")?;
            let caption = field("caption")?;
            if !seen.insert(id.clone()) {
                return Err(CorpusError::DuplicateId { id });
            }
            samples.push(CaptionedSample::new(id, image, caption));
        }
        Self::new(samples, image_root)
    }

    /// Draws `k` samples without replacement whose normalized captions are
    /// pairwise distinct. Samples with empty captions are never drawn.
    ///
    /// Uniform rejection sampling runs for at most `10 * k` draws; any
    /// remaining slots are filled by scanning forward from a random offset.
    pub fn sample_distinct<R: Rng + ?Sized>(
        &self,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<&CaptionedSample>, CorpusError> {
        if k > self.distinct_captions {
            return Err(CorpusError::Capacity {
                requested: k,
                available: self.distinct_captions,
            });
        }
        let mut picked: Vec<usize> = Vec::with_capacity(k);
        let mut captions: HashSet<&str> = HashSet::with_capacity(k);
        let n = self.samples.len();

        let mut accept = |idx: usize, picked: &mut Vec<usize>| {
            let s = &self.samples[idx];
            if s.normalized_caption.is_empty() || captions.contains(s.normalized_caption.as_str()) {
                return;
            }
            captions.insert(s.normalized_caption.as_str());
            picked.push(idx);
        };

        let mut attempts = 0;
        while picked.len() < k && attempts < 10 * k {
            attempts += 1;
            accept(rng.random_range(0..n), &mut picked);
        }
        if picked.len() < k {
            let start = rng.random_range(0..n);
            for off in 0..n {
                if picked.len() == k {
                    break;
                }
                accept((start + off) % n, &mut picked);
            }
        }
        debug_assert_eq!(picked.len(), k);
        Ok(picked.into_iter().map(|i| &self.samples[i]).collect())
    }

    /// Checks image presence, empty captions and caption collisions.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for s in &self.samples {
            let path = self.resolve_image(s);
            if !path.is_file() {
                report.missing_images.push(MissingImage {
                    sample_id: s.sample_id.clone(),
                    path,
                });
            }
            if s.caption.trim().is_empty() {
                report.empty_captions.push(s.sample_id.clone());
            } else {
                groups.entry(&s.normalized_caption).or_default().push(&s.sample_id);
            }
        }
        report.duplicate_captions = groups
            .into_iter()
            .filter(|(_, ids)| ids.len() > 1)
            .map(|(caption, ids)| DuplicateCaption {
                normalized_caption: caption.to_string(),
                sample_ids: ids.into_iter().map(String::from).collect(),
            })
            .collect();
        report
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingImage {
    pub sample_id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateCaption {
    pub normalized_caption: String,
    pub sample_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub missing_images: Vec<MissingImage>,
    pub empty_captions: Vec<String>,
    pub duplicate_captions: Vec<DuplicateCaption>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.missing_images.is_empty() && self.empty_captions.is_empty() && self.duplicate_captions.is_empty()
    }

    pub fn finding_count(&self) -> usize {
        self.missing_images.len() + self.empty_captions.len() + self.duplicate_captions.len()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "missing images: {}", self.missing_images.len())?;
        for m in &self.missing_images {
            writeln!(f, "  {} -> {}", m.sample_id, m.path.display())?;
        }
        writeln!(f, "empty captions: {}", self.empty_captions.len())?;
        for id in &self.empty_captions {
            writeln!(f, "  {id}")?;
        }
        writeln!(f, "duplicate captions: {}", self.duplicate_captions.len())?;
        for d in &self.duplicate_captions {
            writeln!(f, "  {:?}: {}", d.normalized_caption, d.sample_ids.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{stream_rng, Stream};

    const COCO: &str = r#"{
        "images": [
            {"id": 30, "file_name": "c.jpg"},
            {"id": 10, "file_name": "a.jpg"},
            {"id": 20, "file_name": "b.jpg"}
        ],
        "annotations": [
            {"id": 5, "image_id": 10, "caption": "A man riding a horse."},
            {"id": 2, "image_id": 10, "caption": "Lowest id caption."},
            {"id": 9, "image_id": 20, "caption": "A dog."},
            {"id": 7, "image_id": 30, "caption": "Third   image  caption"},
            {"id": 8, "image_id": 30, "caption": "Not chosen"}
        ]
    }"#;

    fn corpus_of(captions: &[&str]) -> Corpus {
        let samples = captions
            .iter()
            .enumerate()
            .map(|(i, c)| CaptionedSample::new(i.to_string(), format!("{i}.jpg"), *c))
            .collect();
        Corpus::new(samples, "/nonexistent").unwrap()
    }

    #[test]
    fn coco_picks_lowest_annotation_id_and_sorts_by_image_id() {
        let c = Corpus::from_coco_str(COCO, Path::new("/img")).unwrap();
        assert_eq!(c.len(), 3);
        let ids: Vec<_> = c.samples().iter().map(|s| s.sample_id.as_str()).collect();
        assert_eq!(ids, ["10", "20", "30"]);
        assert_eq!(c.samples()[0].caption, "Lowest id caption.");
        assert_eq!(c.samples()[2].normalized_caption, "third image caption");
    }

    #[test]
    fn coco_normalization() {
        let text = r#"{"images":[{"id":1,"file_name":"x.jpg"}],
            "annotations":[{"id":1,"image_id":1,"caption":"A man riding a horse."}]}"#;
        let c = Corpus::from_coco_str(text, Path::new(".")).unwrap();
        assert_eq!(c.samples()[0].normalized_caption, "a man riding a horse.");
    }

    #[test]
    fn coco_empty_images() {
        let c = Corpus::from_coco_str(r#"{"images":[],"annotations":[]}"#, Path::new(".")).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn coco_unknown_image_id_lists_offenders() {
        let text = r#"{"images":[{"id":1,"file_name":"x.jpg"}],
            "annotations":[{"id":1,"image_id":4,"caption":"a"},{"id":2,"image_id":3,"caption":"b"}]}"#;
        match Corpus::from_coco_str(text, Path::new(".")) {
            Err(CorpusError::UnknownImages { ids }) => assert_eq!(ids, vec![3, 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coco_parse_error_reports_byte_offset() {
        let text = "{\"images\": [\n  {\"id\": 1, \"file_name\": }\n]}";
        match Corpus::from_coco_str(text, Path::new(".")) {
            Err(CorpusError::Parse { offset, .. }) => {
                assert_eq!(&text[offset..offset + 1], "}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generic_manifest() {
        let text = "{\"id\":\"a\",\"image\":\"a.jpg\",\"caption\":\"One\"}\n{\"id\":\"b\",\"image\":\"b.jpg\",\"caption\":\"Two\"}\n";
        let c = Corpus::from_generic_str(text, Path::new(".")).unwrap();
        assert_eq!(c.len(), 2);
        let with_blank = format!("{text}\n");
        assert_eq!(Corpus::from_generic_str(&with_blank, Path::new(".")).unwrap().len(), 2);
    }

    #[test]
    fn generic_missing_field_message() {
        let err = Corpus::from_generic_str("{\"id\":\"a\",\"image\":\"a.jpg\"}\n", Path::new(".")).unwrap_err();
        assert_eq!(err.to_string(), "line 1: missing field caption");
    }

    #[test]
    fn generic_duplicate_id() {
        let text = "{\"id\":\"a\",\"image\":\"a.jpg\",\"caption\":\"x\"}\n{\"id\":\"a\",\"image\":\"b.jpg\",\"caption\":\"y\"}\n";
        let err = Corpus::from_generic_str(text, Path::new(".")).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { ref id } if id == "a"), "{err}");
    }

    #[test]
    fn generic_interior_blank_line_is_an_error() {
        let text = "{\"id\":\"a\",\"image\":\"a.jpg\",\"caption\":\"x\"}\n\n{\"id\":\"b\",\"image\":\"b.jpg\",\"caption\":\"y\"}\n";
        assert!(matches!(
            Corpus::from_generic_str(text, Path::new(".")),
            Err(CorpusError::BadLine { line: 2, .. })
        ));
    }

    #[test]
    fn sample_distinct_basic() {
        let c = corpus_of(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let mut rng = stream_rng(1, Stream::Structure);
        let got = c.sample_distinct(4, &mut rng).unwrap();
        assert_eq!(got.len(), 4);
        let set: HashSet<_> = got.iter().map(|s| &s.normalized_caption).collect();
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn sample_distinct_capacity_error() {
        let c = corpus_of(&["a cat", "A  cat", "a cat "]);
        let mut rng = stream_rng(1, Stream::Structure);
        match c.sample_distinct(2, &mut rng) {
            Err(CorpusError::Capacity {
                requested: 2,
                available: 1,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sample_distinct_deterministic() {
        let c = corpus_of(&["a", "b", "c", "d", "e", "f"]);
        let a: Vec<_> = c
            .sample_distinct(3, &mut stream_rng(9, Stream::Structure))
            .unwrap()
            .iter()
            .map(|s| s.sample_id.clone())
            .collect();
        let b: Vec<_> = c
            .sample_distinct(3, &mut stream_rng(9, Stream::Structure))
            .unwrap()
            .iter()
            .map(|s| s.sample_id.clone())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_distinct_falls_back_to_scan() {
        // 1 distinct caption among many duplicates forces the scan path
        let mut caps = vec!["dup"; 200];
        caps.push("unique");
        let c = corpus_of(&caps);
        for seed in 0..20 {
            let got = c.sample_distinct(2, &mut stream_rng(seed, Stream::Structure)).unwrap();
            assert_ne!(got[0].normalized_caption, got[1].normalized_caption);
        }
    }

    #[test]
    fn validate_reports_findings() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.jpg"), b"x").unwrap();
        std::fs::write(dir.path().join("b.jpg"), b"x").unwrap();
        let ok = Corpus::new(
            vec![
                CaptionedSample::new("a", "a.jpg", "One"),
                CaptionedSample::new("b", "b.jpg", "Two"),
            ],
            dir.path(),
        )
        .unwrap();
        assert!(ok.validate().is_empty());

        let bad = Corpus::new(
            vec![
                CaptionedSample::new("a", "a.jpg", "Same  caption"),
                CaptionedSample::new("b", "b.jpg", "same caption"),
                CaptionedSample::new("c", "missing.jpg", "Other"),
            ],
            dir.path(),
        )
        .unwrap();
        let r = bad.validate();
        assert_eq!(r.missing_images.len(), 1);
        assert!(r.missing_images[0].path.ends_with("missing.jpg"));
        assert_eq!(r.duplicate_captions.len(), 1);
        assert_eq!(r.duplicate_captions[0].sample_ids, vec!["a", "b"]);
        assert!(r.empty_captions.is_empty());
    }
}
