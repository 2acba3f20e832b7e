//! Random number contract.
//!
//! A run is driven by a single `u64` seed. The seed is expanded into a 256-bit ChaCha8 key by
//! taking four consecutive SplitMix64 outputs (little-endian). Agent `i` owns ChaCha8 stream
//! `i` under that key and consumes exactly [`DRAWS_PER_ROUND`] `u64` words per round, in this
//! order:
//!
//! 1. partner exploration coin,
//! 2. partner pick,
//! 3. visitor strategy for the visit agent `i` makes,
//! 4. host strategy drawn by the host of that visit.
//!
//! All four words are consumed every round whether or not the corresponding decision needed
//! them, so the position of any draw is `round * DRAWS_PER_ROUND + slot` in agent `i`'s stream.
//! Random initial strategy weights come from stream [`INIT_STREAM`].
//!
//! Sweep jobs derive their run seed from `(base seed, point index, replicate)` with
//! [`derive_seed`], so each job is re-runnable on its own.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DRAWS_PER_ROUND: usize = 4;
pub const INIT_STREAM: u64 = u64::MAX;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn root_key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Generator for one numbered stream of a run.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(root_key(seed));
    rng.set_stream(stream);
    rng
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in the open interval `(0, 1)`.
#[inline]
pub fn open_unit_f64(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Stable seed for a sub-job, mixing the base seed with any number of indices.
pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &i in indices {
        state ^= i.wrapping_mul(GOLDEN_GAMMA) ^ out;
        out = splitmix64(&mut state);
    }
    out
}
