//! Deterministic random streams.
//!
//! Every randomized routine derives its generators from a user seed plus a
//! path of stream labels (iteration, chunk index, ...). Work is split into
//! fixed-size chunks and each chunk owns one stream, so results do not depend
//! on how many threads execute the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Scalar;

/// Items per independently seeded chunk in parallel loops.
pub const CHUNK: usize = 256;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a label path into a single 64-bit stream key.
pub fn derive_key(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(seed), |acc, &label| mix64(acc ^ mix64(label)))
}

pub fn stream(seed: u64, labels: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(seed, labels))
}

/// Uniform draw in `[0, 1)`.
pub fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen::<f64>())
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform_in<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    lo + (hi - lo) * uniform::<T, R>(rng)
}

/// Index drawn with probability proportional to `weights` (inverse CDF in
/// index order). Falls back to the last positive entry on rounding overrun.
pub fn weighted_index<T: Scalar, R: Rng + ?Sized>(rng: &mut R, weights: &[T]) -> usize {
    let total: T = weights.iter().copied().sum();
    let u = uniform::<T, R>(rng) * total;
    let mut acc = T::zero();
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights
        .iter()
        .rposition(|w| *w > T::zero())
        .unwrap_or(weights.len().saturating_sub(1))
}
