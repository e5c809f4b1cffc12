//! Seed plumbing. Every random draw in the crate comes from ChaCha8
//! (`rand_chacha::ChaCha8Rng`) seeded through [`derive_seed`], so a single
//! root seed reproduces every artifact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in output metadata next to the seed.
pub const GENERATOR: &str = "chacha8/splitmix64";

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a named component (or trial index) under `root`.
pub fn derive_seed(root: u64, component: u64) -> u64 {
    splitmix64(root ^ splitmix64(component))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of `seed`; shot `i` of a run draws from stream `i`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stable component tags for [`derive_seed`].
pub mod component {
    pub const DATABASE: u64 = 1;
    pub const INPUT: u64 = 2;
    pub const SHOTS: u64 = 3;
    pub const TRIALS: u64 = 4;
    pub const TRACKS: u64 = 5;
}
