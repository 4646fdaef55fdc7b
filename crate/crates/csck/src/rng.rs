//! Counter-based randomness: every operation derives its own stream from a
//! single 64-bit seed plus a stable operation tag, so runs are reproducible
//! and independent of call order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit tag for an operation name (FNV-1a).
pub fn op_tag(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive an RNG for `(seed, op, counter)`. Distinct tags or counters give
/// statistically independent streams.
pub fn derive(seed: u64, op: &str, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ op_tag(op));
    rng.set_stream(counter);
    rng
}
