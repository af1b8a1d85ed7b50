//! Counter-mode seed derivation.
//!
//! Every random stream in a campaign is seeded from the master seed and a
//! path of integer tags (a domain tag first, then indices), so circuits,
//! shots and bootstrap replicates can be produced in any order or in
//! parallel and still come out identical. The mixing function is SplitMix64's
//! finalizer; the streams are ChaCha8. Both are frozen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every random stream in the crate.
pub type SimRng = ChaCha8Rng;

pub mod domain {
    pub const CIRCUIT: u64 = 1;
    pub const SHOT: u64 = 2;
    pub const MODEL: u64 = 3;
    pub const EPSILON: u64 = 4;
    pub const BOOTSTRAP: u64 = 5;
    pub const SWEEP: u64 = 6;
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the stream at `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut s = mix(master ^ 0x6d72_6273_6565_6421);
    for &tag in path {
        s = mix(s.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(tag)));
    }
    s
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_paths_distinct_seeds() {
        let a = derive_seed(7, &[domain::CIRCUIT, 0, 1]);
        let b = derive_seed(7, &[domain::CIRCUIT, 1, 0]);
        let c = derive_seed(8, &[domain::CIRCUIT, 0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &[domain::CIRCUIT, 0, 1]));
    }

    #[test]
    fn frozen_values() {
        // Changing these breaks reproducibility of every stored campaign.
        assert_eq!(derive_seed(0, &[]), 0xcaa5_1ca0_d231_594c);
        assert_eq!(derive_seed(1, &[1, 2, 3]), 0x65f4_3af7_d118_fae6);
    }
}
