//! Stable seed derivation.
//!
//! Item seeds are a SHA-256 digest of the master seed and an item key, so
//! the value for item `i` never depends on which other items were generated
//! or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Independent random streams carved out of one item seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Structure = 0,
    Question = 1,
    Kind = 2,
    Shuffle = 3,
}

fn digest_u64(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}

/// Seed for the item at `item_index` under `master_seed`.
pub fn item_seed(master_seed: u64, item_index: u64) -> u64 {
    digest_u64(&[b"item", &master_seed.to_le_bytes(), &item_index.to_le_bytes()])
}

/// Seed for a string-keyed record (used by the shuffled-frame variant).
pub fn keyed_seed(seed: u64, key: &str) -> u64 {
    digest_u64(&[b"keyed", &seed.to_le_bytes(), key.as_bytes()])
}

/// A ChaCha8 generator for one stream of an item seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn item_seed_is_stable_and_index_sensitive() {
        assert_eq!(item_seed(0, 7), item_seed(0, 7));
        assert_ne!(item_seed(0, 7), item_seed(0, 8));
        assert_ne!(item_seed(0, 7), item_seed(1, 7));
    }

    #[test]
    fn keyed_seed_does_not_collide_with_item_seed() {
        assert_ne!(keyed_seed(0, "7"), item_seed(0, 7));
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = stream_rng(5, Stream::Structure).random();
        let b: u64 = stream_rng(5, Stream::Question).random();
        assert_ne!(a, b);
        let a2: u64 = stream_rng(5, Stream::Structure).random();
        assert_eq!(a, a2);
    }
}
