//! Deterministic RNG streams keyed by run coordinates.
//!
//! Every random decision in a run draws from a stream derived from
//! `(master seed, purpose, generation, slot)`, so results do not depend on
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initialize = 1,
    Breed = 2,
    SeedDerivation = 3,
    Perturb = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the coordinates into one 64-bit key.
pub fn derive_seed(master: u64, purpose: Purpose, generation: u64, slot: u64) -> u64 {
    let mut h = splitmix64(master);
    for part in [purpose as u64, generation, slot] {
        h = splitmix64(h ^ part);
    }
    h
}

pub fn stream(master: u64, purpose: Purpose, generation: u64, slot: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, purpose, generation, slot))
}

/// Master seed for the `index`-th independent run of a batch.
pub fn run_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, Purpose::SeedDerivation, 0, index as u64)
}
