//! Named seed substreams.
//!
//! Every stochastic stage draws from its own generator derived from a single
//! root seed and a stage name, so toggling one stage never shifts the random
//! numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used everywhere in this crate. ChaCha output is specified
/// independently of platform and word size.
pub type Rng = ChaCha8Rng;

/// Substream used for the train/test user split.
pub const SPLIT: &str = "split";
/// Substream used for network weight initialization.
pub const INIT: &str = "init";
/// Substream used for per-epoch rejuvenation draws.
pub const REJUVENATION: &str = "rejuvenation";
/// Substream used for batch shuffling.
pub const SHUFFLE: &str = "shuffle";
/// Substream used to carve the validation slice out of the train cohort.
pub const VALIDATION: &str = "validation";

/// Derives a 64-bit seed for `stage` from `root`.
pub fn derive(root: u64, stage: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(stage.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// A generator seeded directly.
pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// A generator for the named substream of `root`.
pub fn substream(root: u64, stage: &str) -> Rng {
    rng(derive(root, stage))
}
