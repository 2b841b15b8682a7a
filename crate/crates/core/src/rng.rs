//! Deterministic RNG stream derivation.
//!
//! Every stochastic routine takes a `u64` seed and derives independent
//! sub-streams from `(seed, stream index)`. Replicas run in parallel but the
//! stream for replica `i` depends only on the master seed and `i`, so results
//! are identical regardless of thread count or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; decorrelates consecutive stream indices.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for sub-stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let a = splitmix64(seed ^ 0x243f_6a88_85a3_08d3);
    let b = splitmix64(a ^ stream);
    let c = splitmix64(b.wrapping_add(0x1319_8a2e_0370_7344));
    let d = splitmix64(c ^ seed.rotate_left(17));
    key[..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..].copy_from_slice(&d.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}
