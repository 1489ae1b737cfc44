//! Counter-based uniform stream.
//!
//! Each draw is a pure function of `(seed, index)` — a Weyl increment mixed
//! through the SplitMix64 finalizer — so any subset of indices can be
//! generated in any order, on any number of threads, and the stream is
//! bitwise identical across runs and platforms.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval `(0, 1)`.
///
/// The top 53 bits are centered as `(k + 0.5) * 2^-53`, so 0 and 1 are never
/// produced and every value is a valid quantile argument.
#[inline]
pub fn unit_uniform(seed: u64, index: u64) -> f64 {
    let z = mix(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)));
    ((z >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}
