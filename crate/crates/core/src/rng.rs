//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by the
//! experiment seed and positioned on its own 64-bit stream. The stream id
//! packs the purpose in the top byte and an index (row, realization, ...)
//! in the low 56 bits, so rows can be sampled in any order or in parallel
//! and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; occupies the top byte of the stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Fitness = 1,
    Adjacency = 2,
    Partition = 3,
    PoissonAtoms = 4,
}

const INDEX_MASK: u64 = (1 << 56) - 1;

/// Generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index & INDEX_MASK));
    rng
}

/// SplitMix64 finaliser, used to derive per-realization seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
