//! Seed derivation.
//!
//! Every stochastic component draws from a `ChaCha8Rng`. Independent streams
//! (per subject, session, fold, epoch shuffle, ...) are obtained by mixing the
//! user seed with stream indices through [`mix`], which folds each index in
//! with the SplitMix64 finalizer. The mapping is fixed per release.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a sequence of stream indices.
pub fn mix(seed: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(seed), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(1))))
}

pub fn rng(seed: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, indices))
}

/// Stream tags, so unrelated consumers of the same seed never collide.
pub(crate) mod stream {
    pub const SUBJECT: u64 = 0x5355_424a;
    pub const SESSION: u64 = 0x5345_5353;
    pub const INIT: u64 = 0x494e_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const FOLD: u64 = 0x464f_4c44;
}
