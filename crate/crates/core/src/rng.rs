//! Seeded, independent random streams.
//!
//! Every stochastic call site takes its own stream derived from a base seed
//! and a tuple of tags (step, group index, ...). Two call sites with
//! different tags never share state, so results do not depend on the order
//! or the thread in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a list of tags into a single 64-bit seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Returns an independent stream for `(base, tags...)`.
pub fn stream(base: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

// Domain tags keep streams of different purposes apart even when they share a seed.
pub(crate) const TAG_BANK: u64 = 0xB4;
pub(crate) const TAG_SHUFFLE: u64 = 0x5F;
pub(crate) const TAG_ROLLOUT: u64 = 0x20;
pub(crate) const TAG_SEARCH: u64 = 0x5E;
pub(crate) const TAG_REPLACE: u64 = 0x2E;
pub(crate) const TAG_FILTER: u64 = 0xF1;
