//! Counter-based seed derivation.
//!
//! Every random stream in a run is keyed by `(parent seed, counter)` through
//! a SplitMix64 finalizer, so adding runs, nodes or methods never shifts the
//! streams that already exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `counter` under `parent`.
pub fn derive(parent: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ counter.wrapping_mul(GOLDEN))
}

/// Fresh stream for `counter` under `parent`.
pub fn stream(parent: u64, counter: u64) -> SimRng {
    SimRng::seed_from_u64(derive(parent, counter))
}

/// Stable 64-bit tag for a label, used as a counter for named sub-streams.
pub fn tag(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        })
}
