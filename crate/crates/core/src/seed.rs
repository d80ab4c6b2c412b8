//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by `(master seed, labels...)`
//! through the SplitMix64 finalizer, so a stream's contents never depend on
//! which worker evaluates it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels shared by the harness and the command-line front end.
pub mod label {
    pub const DATA: u64 = 0;
    pub const TIES: u64 = 1;
    pub const PERMS: u64 = 2;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `label` under `parent`.
#[inline]
pub fn derive(parent: u64, label: u64) -> u64 {
    splitmix64(parent ^ splitmix64(label.wrapping_add(GOLDEN)))
}

pub fn rng_for(parent: u64, label: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(parent, label))
}

/// Folds a slice of 64-bit words into a seed; used to key tie-breaking
/// streams by content so that they do not depend on argument order.
pub fn fold_words<I: IntoIterator<Item = u64>>(seed: u64, words: I) -> u64 {
    words
        .into_iter()
        .fold(splitmix64(seed), |acc, w| splitmix64(acc ^ w))
}
