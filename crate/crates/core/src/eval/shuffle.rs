use crate::dataset::ManifestRecord;
use crate::pseudo_video::permute_frames;
use crate::seed::{keyed_seed, stream_rng, Stream};

/// The permutation applied to record `id` under variant seed `seed`.
pub fn variant_permutation(seed: u64, id: &str, n_frames: usize) -> Vec<usize> {
    if n_frames == 0 {
        return Vec::new();
    }
    permute_frames(n_frames, &mut stream_rng(keyed_seed(seed, id), Stream::Shuffle))
}

/// Reorders every record's frames with a per-item permutation derived from
/// `(seed, id)` and records it in `permutation`. Other fields are untouched.
///
/// Shuffling an already shuffled manifest composes the permutations, so
/// `permutation` always indexes the original frame order.
pub fn make_shuffled_variant(manifest: &[ManifestRecord], seed: u64) -> Vec<ManifestRecord> {
    manifest
        .iter()
        .map(|r| {
            let perm = variant_permutation(seed, &r.id, r.frames.len());
            let mut out = r.clone();
            out.frames = perm.iter().map(|&i| r.frames[i].clone()).collect();
            out.permutation = Some(match &r.permutation {
                Some(prev) => perm.iter().map(|&i| prev[i]).collect(),
                None => perm,
            });
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::TaskId;

    fn rec(id: &str, n_frames: usize) -> ManifestRecord {
        ManifestRecord {
            id: id.into(),
            video_id: id.into(),
            task: TaskId::MD,
            question: "Q".into(),
            options: vec!["a".into(), "b".into()],
            answer: 1,
            frames: (0..n_frames).map(|i| format!("f{i}")).collect(),
            n_scenes: 1,
            scene_boundaries: vec![0],
            durations: vec![n_frames],
            source_ids: vec!["s".into()],
            seed: 3,
            permutation: None,
        }
    }

    #[test]
    fn single_frame_unchanged() {
        let out = make_shuffled_variant(&[rec("a", 1)], 0);
        assert_eq!(out[0].frames, vec!["f0"]);
        assert_eq!(out[0].permutation, Some(vec![0]));
    }

    #[test]
    fn six_frames_permuted_not_identity() {
        let orig = rec("a", 6);
        let out = make_shuffled_variant(std::slice::from_ref(&orig), 9);
        assert_ne!(out[0].frames, orig.frames);
        let mut a = out[0].frames.clone();
        a.sort();
        assert_eq!(a, orig.frames);
        let mut rest = out[0].clone();
        rest.frames = orig.frames.clone();
        rest.permutation = None;
        assert_eq!(rest, orig);
        assert!(out[0].check().is_ok());
    }

    #[test]
    fn deterministic_per_seed() {
        let recs: Vec<_> = (0..20).map(|i| rec(&i.to_string(), 5)).collect();
        assert_eq!(make_shuffled_variant(&recs, 4), make_shuffled_variant(&recs, 4));
        assert_ne!(make_shuffled_variant(&recs, 4), make_shuffled_variant(&recs, 5));
    }

    #[test]
    fn reshuffle_composes() {
        let orig = rec("a", 7);
        let once = make_shuffled_variant(std::slice::from_ref(&orig), 1);
        let twice = make_shuffled_variant(&once, 2);
        let perm = twice[0].permutation.clone().unwrap();
        let rebuilt: Vec<_> = perm.iter().map(|&i| orig.frames[i].clone()).collect();
        assert_eq!(rebuilt, twice[0].frames);
    }
}
