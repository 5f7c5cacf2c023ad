//! Seed derivation for independent, reproducible random streams.
//!
//! Every stream is a `ChaCha8Rng` seeded with
//! `derive_seed(seed, domain, a, b)`, a SplitMix64 chain over the four
//! words. Monte Carlo block streams use `(domain = trial, a = k, b = j)`
//! offset into [`TRIAL_DOMAIN`]; scenario phases use [`PHASE_DOMAIN`].
//! Results therefore never depend on how trials are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const PHASE_DOMAIN: u64 = 0x5048_4153_4553_0000;
pub(crate) const TRIAL_DOMAIN: u64 = 0x5452_4941_4c00_0000;
pub(crate) const SWEEP_DOMAIN: u64 = 0x5357_4545_5000_0000;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with three stream coordinates.
pub fn derive_seed(seed: u64, domain: u64, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ domain);
    h = splitmix64(h ^ a);
    splitmix64(h ^ b.rotate_left(32))
}

/// Stream for block `(k, j)` in Monte Carlo trial `trial`.
pub fn block_stream(seed: u64, trial: u64, k: usize, j: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, TRIAL_DOMAIN ^ trial, k as u64, j as u64))
}

/// Seed for grid point `index` of a sweep run without common random numbers.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, SWEEP_DOMAIN, index as u64, 0)
}
