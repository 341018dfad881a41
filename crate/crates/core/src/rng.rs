//! Keyed random substreams.
//!
//! Every random quantity in the simulator is drawn from a ChaCha stream
//! whose key is derived from `(seed, domain, a, b)`. Users and links can
//! therefore be evaluated in any order, or in parallel, and still see the
//! same numbers as a serial run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream domain for user positions.
pub const DOMAIN_USERS: u64 = 0x5553_4552;
/// Substream domain for per-link channel draws.
pub const DOMAIN_CHANNEL: u64 = 0x4348_414e;
/// Substream domain for site failure ordering.
pub const DOMAIN_SITES: u64 = 0x5349_5445;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for the substream `(seed, domain, a, b)`.
pub fn substream(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for (i, word) in [domain, a, b, 0].into_iter().enumerate() {
        state ^= word;
        let mixed = splitmix64(&mut state);
        key[i * 8..(i + 1) * 8].copy_from_slice(&mixed.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
