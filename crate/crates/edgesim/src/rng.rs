//! Seed derivation for reproducible per-application random streams.
//!
//! Every stochastic component draws from its own stream keyed by
//! `(seed, label)`, so adding or removing one application never perturbs
//! the draws of another.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the label bytes; stable across platforms and runs.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent stream for `(seed, label)`.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ label_hash(label))
}

/// Stream with an extra numeric component, e.g. a trial or app index.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mix = index.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    ChaCha8Rng::seed_from_u64(seed ^ label_hash(label) ^ mix)
}

/// Inverse-CDF exponential draw with the given rate (events per unit time).
pub fn exp_sample<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    // gen::<f64>() is in [0, 1); flip to (0, 1] so ln never sees zero.
    let u: f64 = 1.0 - rng.gen::<f64>();
    -u.ln() / rate
}

/// Uniform draw from [lo, hi].
pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
