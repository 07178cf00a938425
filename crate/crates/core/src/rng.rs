//! Seeded random streams. Every stochastic step in the crate (weight init,
//! shuffling, splits, bootstrap, synthetic data) draws from one of these so
//! runs are reproducible from a single `u64`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

/// Xoshiro256++ whose 256-bit state is expanded from `seed` with SplitMix64.
pub fn seeded(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Independent stream for the `index`-th unit of work under `seed`. The
/// index is hashed into the seed (SplitMix64 finalizer) rather than added, so
/// nearby base seeds do not produce shifted copies of each other's streams.
pub fn derived(seed: u64, index: u64) -> Rng {
    seeded(mix(seed, index))
}

/// Mixes a tag into a seed so unrelated consumers of the same base seed do
/// not share streams.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
