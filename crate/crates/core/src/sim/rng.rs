//! Per-trial seed derivation.
//!
//! Every trial owns an independent stream seeded from
//! `(master seed, cell key, trial index)`, so results do not depend on the
//! order in which a thread pool schedules trials.

/// SplitMix64 finalizer; a bijection on `u64` with good avalanche.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one key.
pub fn mix(words: impl IntoIterator<Item = u64>) -> u64 {
    words
        .into_iter()
        .fold(0x6a09_e667_f3bc_c908, |acc, w| splitmix64(acc ^ splitmix64(w)))
}

pub fn trial_seed(master: u64, cell_key: u64, trial: u64) -> u64 {
    mix([master, cell_key, trial])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference generator seeded with 0
        let mut state = 0u64;
        let mut next = || {
            let out = splitmix64(state);
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            out
        };
        assert_eq!(next(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(next(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(next(), 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn seeds_differ_across_every_coordinate() {
        let mut seen = HashSet::new();
        for master in 0..4 {
            for cell in 0..16 {
                for trial in 0..256 {
                    assert!(seen.insert(trial_seed(master, cell, trial)));
                }
            }
        }
        assert_ne!(mix([1, 2]), mix([2, 1]));
    }
}
