//! Seeded random streams.
//!
//! Every stochastic decision in the crate draws from a stream whose seed is
//! derived from the run seed plus a fixed tuple of tags (stream kind,
//! layer, node index, ...). Results therefore do not depend on evaluation
//! order or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream kinds used when deriving seeds.
pub mod tag {
    pub const SPLIT_GROUP_ITEM: u64 = 1;
    pub const SPLIT_USER_ITEM: u64 = 2;
    pub const INIT: u64 = 3;
    pub const IPM_SAMPLE: u64 = 4;
    pub const HRL_SAMPLE: u64 = 5;
    pub const DROPOUT: u64 = 6;
    pub const NEGATIVES: u64 = 7;
    pub const SHUFFLE: u64 = 8;
    pub const PASS: u64 = 9;
    pub const SYNTH: u64 = 10;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a tuple of tags into a new 64-bit seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(base: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}
