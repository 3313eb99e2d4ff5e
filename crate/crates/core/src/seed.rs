//! Deterministic RNG streams.
//!
//! Every randomized stage derives its own independent ChaCha stream from the
//! run seed plus a stage label (and optionally an index), so adding or
//! reordering stages never perturbs the draws of another stage and identical
//! inputs always reproduce identical outputs across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives the RNG stream for a named stage.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    derive(seed, label, None)
}

/// Derives the RNG stream for one indexed item of a stage (a fold, a user, a
/// scenario), independent of its siblings.
pub fn stream_indexed(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    derive(seed, label, Some(index))
}

/// Draws a fresh sub-seed, for handing a derived stream to nested stages.
pub fn sub_seed(rng: &mut ChaCha8Rng) -> u64 {
    rng.random()
}

fn derive(seed: u64, label: &str, index: Option<u64>) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    if let Some(i) = index {
        hasher.update(i.to_le_bytes());
    }
    ChaCha8Rng::from_seed(hasher.finalize().into())
}
