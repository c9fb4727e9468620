//! Seeded, schedule-independent shot loops.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::SampleBatch;

/// Shots per RNG stream. Chunk `i` draws from stream `i` of the seeded
/// generator, so tallies do not depend on how chunks are scheduled.
pub(crate) const SHOTS_PER_STREAM: u64 = 4096;

pub(crate) fn chunked_tallies<S, I, F>(seed: u64, shots: u64, width: usize, init: I, draw: F) -> SampleBatch
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut ChaCha8Rng) -> u64 + Sync + Send,
{
    let streams = shots.div_ceil(SHOTS_PER_STREAM);
    let partials: Vec<HashMap<u64, u64>> = (0..streams)
        .into_par_iter()
        .map_init(&init, |state, stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let n = SHOTS_PER_STREAM.min(shots - stream * SHOTS_PER_STREAM);
            let mut counts = HashMap::new();
            for _ in 0..n {
                *counts.entry(draw(state, &mut rng)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut tallies = BTreeMap::new();
    for part in partials {
        for (k, c) in part {
            *tallies.entry(k).or_insert(0) += c;
        }
    }
    SampleBatch::new(seed, width, tallies)
}

/// Index `i` with `cdf[i-1] <= u < cdf[i]`, where `cdf` is an inclusive
/// running sum. Zero-width bins are never selected.
pub(crate) fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let target = u * total;
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn inverse_cdf_skips_empty_bins() {
        let cdf = [0.0, 0.25, 0.25, 1.0];
        assert_eq!(inverse_cdf(&cdf, 0.0), 1);
        assert_eq!(inverse_cdf(&cdf, 0.2), 1);
        assert_eq!(inverse_cdf(&cdf, 0.25), 3);
        assert_eq!(inverse_cdf(&cdf, 0.999_999), 3);
    }

    #[test]
    fn tallies_are_deterministic_and_complete() {
        let run = || chunked_tallies(9, 10_001, 3, || (), |_, rng| rng.random_range(0..8));
        let a = run();
        assert_eq!(a.shots, 10_001);
        assert_eq!(a, run());
        assert_ne!(a.tallies, chunked_tallies(10, 10_001, 3, || (), |_, rng| rng.random_range(0..8)).tallies);
    }
}
