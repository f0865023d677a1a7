//! Deterministic seed derivation.
//!
//! Every random quantity in the crate descends from a single `u64` seed.
//! Sub-streams (chains, folds, replications) get their own seeds through a
//! SplitMix64 chain over `(base, stream tags...)`, so results are bit-identical
//! across runs and independent of thread scheduling.

use rand::SeedableRng;

/// PRNG used throughout; fixed explicitly so streams are stable across
/// dependency upgrades.
pub type Prng = rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a list of stream tags.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    let mut state = mix(base.wrapping_add(GAMMA));
    for &tag in stream {
        state = mix(state ^ mix(tag.wrapping_add(GAMMA)));
    }
    state
}

/// RNG seeded from `derive_seed(base, stream)`.
pub fn rng_from(base: u64, stream: &[u64]) -> Prng {
    Prng::seed_from_u64(derive_seed(base, stream))
}

/// Stream tags for the independent random consumers. Values are arbitrary but
/// must never be reused across roles.
pub mod streams {
    pub const CHAIN: u64 = 0x01;
    pub const CHAIN_INIT: u64 = 0x02;
    pub const CV_SHUFFLE: u64 = 0x10;
    pub const CV_FIT: u64 = 0x11;
    pub const PIPELINE_TUNE: u64 = 0x20;
    pub const PIPELINE_FIT: u64 = 0x21;
    pub const REP_DATA: u64 = 0x30;
    pub const REP_PIPELINE: u64 = 0x31;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_stable_and_tag_sensitive() {
        let a = derive_seed(7, &[1, 2]);
        let b = derive_seed(7, &[1, 2]);
        assert_eq!(a, b);
        assert_ne!(a, derive_seed(7, &[2, 1]));
        assert_ne!(a, derive_seed(8, &[1, 2]));
        assert_ne!(a, derive_seed(7, &[1]));
    }

    #[test]
    fn rng_streams_reproduce() {
        let mut r1 = rng_from(42, &[streams::CHAIN, 3]);
        let mut r2 = rng_from(42, &[streams::CHAIN, 3]);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
