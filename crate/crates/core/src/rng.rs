//! Keyed random streams.
//!
//! Every stochastic stage draws from a ChaCha stream derived from the user
//! seed plus a tuple of integer keys (sweep point, batch, restart, ...), so
//! results do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn keyed_rng(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    ChaCha8Rng::seed_from_u64(h)
}
