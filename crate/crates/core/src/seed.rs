//! Seed derivation.
//!
//! Every random stream in the pipeline is a ChaCha8 generator seeded from a
//! 64-bit value produced by [`mix`]. Streams are addressed by a fixed list
//! of coordinates (master seed, stream tag, indices), so results do not
//! depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `seed`: `h = splitmix64(seed)`, then
/// `h = splitmix64(h ^ part)` for each part in order.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ p))
}

pub fn rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, parts))
}

/// Stream tags; keep these stable, they are part of the reproducibility contract.
pub mod tag {
    pub const WALK: u64 = 0x5741_4c4b; // "WALK"
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const SUBSAMPLE: u64 = 0x5355_4253;
    pub const REPEAT: u64 = 0x5245_5054;
    pub const INIT: u64 = 0x494e_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const DROPOUT: u64 = 0x4452_4f50;
    pub const VALIDATION: u64 = 0x5641_4c49;
    pub const SYNTH: u64 = 0x5359_4e54;
}

/// Walk-stream seed for node `node` and walk index `k`.
#[inline]
pub fn walk_seed(master: u64, node: u32, k: u32) -> u64 {
    mix(master, &[tag::WALK, node as u64, k as u64])
}
