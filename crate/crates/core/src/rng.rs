//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every phase screen is drawn from its own ChaCha8 stream seeded with
//! `derive_seed(master, realization, slab)`, a SplitMix64 chain:
//!
//! ```text
//! s = mix(master + γ·(realization + 1))
//! s = mix(s + γ·(slab + 1))
//! ```
//!
//! with γ = 0x9E3779B97F4A7C15 and `mix` the SplitMix64 finaliser.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, realization: u64, slab: u64) -> u64 {
    let s = mix(master.wrapping_add(GOLDEN.wrapping_mul(realization.wrapping_add(1))));
    mix(s.wrapping_add(GOLDEN.wrapping_mul(slab.wrapping_add(1))))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
