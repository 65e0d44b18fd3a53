//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`. Trial streams use
//! `base_seed ^ splitmix64(trial_index)`, so a trial's draws never depend on
//! the order in which trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    base_seed ^ splitmix64(trial_index)
}

/// Seed for the `attempt`-th resample of a degenerate trial (attempt 0 is the
/// original draw).
pub fn resample_seed(base_seed: u64, trial_index: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        trial_seed(base_seed, trial_index)
    } else {
        splitmix64(trial_seed(base_seed, trial_index) ^ splitmix64(attempt.rotate_left(32)))
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `lo + (hi - lo) * u` with `u` uniform on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
