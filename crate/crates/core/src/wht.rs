//! Fast Walsh–Hadamard transform.

use num_complex::Complex64;

/// In-place unnormalized transform: `out[k] = Σ_j (-1)^{popcount(j & k)} in[j]`.
///
/// Panics unless the length is a power of two.
pub fn walsh_hadamard(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "transform length must be a power of two, got {n}");
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}
