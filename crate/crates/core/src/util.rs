use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// Smallest integer `k` with `k >= x`, tolerant to float noise such as `0.3 * 10.0`.
pub(crate) fn ceil_tol(x: f64) -> i64 {
    (x - TOL).ceil() as i64
}

/// Largest integer `k` with `k <= x`, tolerant to float noise.
pub(crate) fn floor_tol(x: f64) -> i64 {
    (x + TOL).floor() as i64
}

/// Integer lower bound for "count >= x" comparisons, clamped at zero.
pub(crate) fn at_least(x: f64) -> usize {
    ceil_tol(x).max(0) as usize
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed and a worker/attempt index.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
