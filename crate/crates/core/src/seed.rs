//! Seed derivation and counter-based uniform draws.
//!
//! Every random quantity in a run is a pure function of a master seed and
//! a small tuple of indices, so results never depend on thread scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into a single 64-bit seed.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(GOLDEN, |acc, &p| {
        mix(acc.wrapping_add(GOLDEN) ^ mix(p.wrapping_add(GOLDEN)))
    })
}

/// Uniform draw in `[0, 1)` addressed by `(seed, stream, index)`.
pub fn uniform(seed: u64, stream: u64, index: u64) -> f64 {
    let bits = derive(&[seed, stream, index]);
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
