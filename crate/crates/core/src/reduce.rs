//! Deterministic floating-point reductions.
//!
//! Every sum in the crate goes through these helpers so that results do not
//! depend on how work was split across threads: values are first collected in
//! canonical index order and then reduced serially.

const BLOCK: usize = 32;

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sum that is invariant under any permutation of `values`.
///
/// Values are sorted with `total_cmp` before the pairwise reduction, so two
/// slices holding the same multiset produce identical bits.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    pairwise_sum(values)
}

/// Composite trapezoid rule on a uniform partition with spacing `dt`.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let interior = pairwise_sum(&samples[1..n - 1]);
            dt * (0.5 * (samples[0] + samples[n - 1]) + interior)
        }
    }
}
