use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::maximal::maximal_values;
use crate::error::{Error, Result};
use crate::space::GridFunction;

/// Outcome of sampling `|f(x) - f(y)| / (|x - y| (MDf(x) + MDf(y)))`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuotientReport {
    pub pairs: usize,
    /// Largest finite ratio; `0/0` counts as `0`.
    pub max_ratio: f64,
    /// Pairs whose ratio exceeds the constant, degenerate pairs included.
    pub violations_at_c: usize,
    pub constant: f64,
    /// Node pairs with `MDf(x) + MDf(y) = 0` but `f(x) != f(y)`.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Samples node pairs uniformly (seeded) and checks the pointwise bound of
/// difference quotients by the maximal function of the gradient.
pub fn difference_quotient_check(f: &GridFunction, pair_samples: usize, seed: u64, constant: f64) -> Result<QuotientReport> {
    let values = f.require_scalar()?;
    if pair_samples == 0 {
        return Err(Error::InvalidArgument("pair_samples must be at least 1".into()));
    }
    let spec = f.spec();
    if spec.len() < 2 {
        return Err(Error::InvalidGrid("need two distinct nodes".into()));
    }
    let grad = f.gradient()?.magnitudes();
    let mdf = maximal_values(spec, &grad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut violations = 0;
    let mut degenerate = Vec::new();
    let (mut xa, mut xb) = (vec![0.0; spec.dim()], vec![0.0; spec.dim()]);
    for _ in 0..pair_samples {
        let a = rng.gen_range(0..spec.len());
        let mut b = rng.gen_range(0..spec.len() - 1);
        if b >= a {
            b += 1;
        }
        spec.node_into(a, &mut xa);
        spec.node_into(b, &mut xb);
        let dist = xa.iter().zip(&xb).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        let num = (values[a] - values[b]).abs();
        let den = dist * (mdf[a] + mdf[b]);
        if num == 0.0 {
            continue;
        }
        if den == 0.0 {
            degenerate.push((a, b));
            violations += 1;
            continue;
        }
        let ratio = num / den;
        max_ratio = max_ratio.max(ratio);
        if ratio > constant {
            violations += 1;
        }
    }
    Ok(QuotientReport { pairs: pair_samples, max_ratio, violations_at_c: violations, constant, degenerate_pairs: degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Extension, GridSpec};

    #[test]
    fn constant_function_has_zero_ratio() {
        let spec = GridSpec::cube(2, 0.0, 1.0, 9, Extension::ZeroOutside).unwrap();
        let r = difference_quotient_check(&GridFunction::constant(spec, 4.0).unwrap(), 200, 1, 1.0).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.violations_at_c, 0);
    }

    #[test]
    fn identity_gives_one_half() {
        let spec = GridSpec::cube(1, 0.0, 1.0, 65, Extension::ZeroOutside).unwrap();
        let f = GridFunction::from_fn(spec, |x| x[0]).unwrap();
        let r = difference_quotient_check(&f, 500, 3, 0.5 + 1e-12).unwrap();
        assert!((r.max_ratio - 0.5).abs() < 1e-12, "{}", r.max_ratio);
        assert_eq!(r.violations_at_c, 0);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let spec = GridSpec::cube(2, 0.0, 1.0, 17, Extension::ZeroOutside).unwrap();
        let f = GridFunction::from_fn(spec, |x| (3.0 * x[0]).sin() * x[1]).unwrap();
        let a = difference_quotient_check(&f, 300, 9, 1.0).unwrap();
        let b = difference_quotient_check(&f, 300, 9, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
