//! Deterministic fan-out of a single run seed to independent pipeline stages.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for [`derive_seed`].
pub mod stage {
    pub const TOPICS: u64 = 1;
    pub const COMMUNITIES: u64 = 2;
    pub const BASELINE: u64 = 3;
}

/// Seed for `stage`, derived from the run-level `seed`.
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng.next_u64()
}
