//! Seed derivation for independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Random stream identifiers used by one solver run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Bls = 2,
    Tournament = 3,
    Completion = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive mix of a master seed with a sequence of keys.
pub fn mix(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(master: u64, which: Stream) -> Rng {
    Rng::seed_from_u64(mix(master, &[which as u64]))
}

/// Seed for run `run` of instance `instance` in a batch.
pub fn run_seed(master: u64, instance: usize, run: usize) -> u64 {
    mix(master, &[0x00be_7c4e, instance as u64, run as u64])
}
