//! Seeded substreams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` whose seed is
//! derived from a master seed and an index by [`substream_seed`]. The draw
//! for index `l` therefore never depends on which thread produced it or in
//! what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer, a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`:
/// `mix64(master ^ mix64((index + 1) * GOLDEN_GAMMA))`.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn substream(master: u64, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(substream_seed(master, index))
}
