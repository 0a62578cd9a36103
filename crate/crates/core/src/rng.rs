//! Seeding conventions.
//!
//! Every random stream in the crate is a [`ChaCha20Rng`] (the 20-round ChaCha
//! stream cipher used as a PRNG). Its output depends only on the 64-bit seed,
//! independent of platform, so runs are bit-reproducible.
//!
//! Replica seeds are derived from a master seed with the SplitMix64 finalizer:
//!
//! ```text
//! derive_seed(master, i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15)
//! ```
//!
//! (wrapping arithmetic), so replica `i` draws the same stream no matter which
//! thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type CwRng = ChaCha20Rng;

/// Name recorded in run records for the generator in use.
pub const RNG_ALGORITHM: &str = "chacha20";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `index` of a run with the given master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> CwRng {
    ChaCha20Rng::seed_from_u64(seed)
}
