//! Fixtures shared by the benchmarks.

use iqp_core::random::random_classed_iqp;
use iqp_core::Circuit;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An `iqp-z` sampler workload: `n` lines, `m` outputs, `gates` gates of
/// arity at most 3.
pub fn sampler_circuit(n: usize, m: usize, gates: usize, seed: u64) -> Circuit {
    random_classed_iqp(&mut ChaCha8Rng::seed_from_u64(seed), n, m, gates, 3)
}

pub fn random_vector(m: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1usize << m).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}
