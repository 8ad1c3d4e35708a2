//! Counter-based stream seeding: every (seed, instance, replication, purpose)
//! tuple maps to its own independent generator, so replications can run in
//! any order or in parallel and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Structure = 1,
    PriorCenter = 2,
    Instance = 3,
    Environment = 4,
    Policy = 5,
    Diagnostics = 6,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the stream coordinates into a single 64-bit seed.
pub fn mix(base_seed: u64, instance: u64, replication: u64, purpose: Purpose) -> u64 {
    [instance, replication, purpose as u64]
        .into_iter()
        .fold(splitmix64(base_seed), |acc, x| splitmix64(acc ^ splitmix64(x)))
}

pub fn stream(base_seed: u64, instance: u64, replication: u64, purpose: Purpose) -> StreamRng {
    StreamRng::seed_from_u64(mix(base_seed, instance, replication, purpose))
}
