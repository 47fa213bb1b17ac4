//! Seeded random streams for the Monte Carlo code.
//!
//! Every trajectory gets its own Xoshiro256++ generator. The 64-bit state
//! seed for trajectory `i` of a run seeded with `seed` is
//! `seed ^ splitmix64(i)`, expanded to 256 bits by SplitMix64 (the
//! reference `seed_from_u64`). Uniforms are `(next_u64() >> 11) · 2⁻⁵³`.
//! All three pieces have published reference implementations, so streams
//! can be reproduced outside Rust.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// SplitMix64 finaliser applied to `x + golden gamma`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed ^ splitmix64(index))
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(rng: &mut StreamRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
