//! Seeded random streams and seed derivation.
//!
//! Every stochastic component takes its stream from a seed derived from the
//! master seed, so that adding work in one place never shifts the draws seen
//! somewhere else.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `base` and a salt.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    mix(mix(base) ^ salt.rotate_left(17) ^ 0xA076_1D64_78BD_642F)
}

/// Derives a seed from `base` and a sequence of string labels.
pub fn derive_seed_str(base: u64, labels: &[&str]) -> u64 {
    labels
        .iter()
        .fold(base, |acc, label| derive_seed(acc, fnv1a(label.as_bytes())))
}

/// 64-bit FNV-1a. Stable across platforms and toolchains, unlike `DefaultHasher`.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
