//! Seeded pseudo-random streams shared by every stochastic step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator algorithm, recorded in reports and sidecars.
pub const PRNG_ID: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64";

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-task.
///
/// The tag is folded in with a splitmix64 finalizer so that nearby seeds and
/// tags do not produce correlated ChaCha keys.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
