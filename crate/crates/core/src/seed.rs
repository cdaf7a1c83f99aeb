//! Deterministic seed derivation for replicate, resample and holdout streams.
//!
//! Every repeated computation (risk replicates, bootstrap resamples, noise
//! streams) draws from its own RNG seeded through [`derive_seed`], so results
//! are independent of evaluation order and safe to compute in parallel.

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stream `stream` of a master seed.
///
/// Distinct streams of the same master are decorrelated; the same
/// (master, stream) pair always yields the same seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}
