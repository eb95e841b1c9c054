use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::unit_sphere_area;
use crate::reduce::pairwise_sum;
use crate::space::{Extension, GridFunction};

// keeps |x - y|^{-(sp + n)} representable on fine grids
const EXPONENT_CAP: f64 = 64.0;

/// Discrete Slobodeckij double integral and the bound on the excluded
/// diagonal cells.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeminormEstimate {
    /// `sum_{x != y} |f(x) - f(y)|^p / |x - y|^{sp + n} * cellvol^2`.
    pub integral: f64,
    /// Bound on the contribution of pairs closer than one spacing, not added.
    pub diagonal_remainder: f64,
    pub s: f64,
    pub p: f64,
}

impl SeminormEstimate {
    /// `[f]_{s,p}`, the `p`-th root of the double integral.
    pub fn seminorm(&self) -> f64 {
        self.integral.powf(1.0 / self.p)
    }
}

/// Sobolev-Slobodeckij double integral of a scalar grid function over the
/// box, both variables restricted to nodes.
pub fn fractional_seminorm(f: &GridFunction, s: f64, p: f64) -> Result<SeminormEstimate> {
    let values = f.require_scalar()?;
    let spec = f.spec();
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("smoothness {s} must lie in (0, 1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent {p} must be finite and at least 1")));
    }
    if spec.len() < 2 {
        return Err(Error::InvalidGrid("the double integral needs at least two nodes".into()));
    }
    let n = spec.dim();
    let power = s * p + n as f64;
    if power >= EXPONENT_CAP {
        return Err(Error::InvalidArgument(format!("sp + n = {power} exceeds the quadrature cap {EXPONENT_CAP}")));
    }
    let h = spec.spacings();
    // kernel weight for each absolute index offset, laid out like the grid
    let weight: Vec<f64> = (0..spec.len())
        .map(|i| {
            let d2: f64 = spec.multi_index(i).iter().zip(&h).map(|(k, hi)| (*k as f64 * hi).powi(2)).sum();
            if d2 == 0.0 {
                0.0
            } else {
                d2.powf(-0.5 * power)
            }
        })
        .collect();
    let strides = spec.strides();
    let rows: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|x| {
            let xi = spec.multi_index(x);
            let mut terms = Vec::with_capacity(spec.len());
            let mut z = vec![0usize; n];
            for (y, fy) in values.iter().enumerate() {
                spec.multi_index_into(y, &mut z);
                let idx: usize = (0..n).map(|a| z[a].abs_diff(xi[a]) * strides[a]).sum();
                let diff = (values[x] - fy).abs();
                let term = if p == 1.0 { diff } else { diff.powf(p) };
                terms.push(term * weight[idx]);
            }
            pairwise_sum(&terms)
        })
        .collect();
    let cell = spec.cell_volume();
    let integral = pairwise_sum(&rows) * cell * cell;

    // |f(x) - f(y)| <= osc(x) |x - y| / h near the diagonal
    let hmin = spec.min_spacing();
    let periodic = spec.extension() == Extension::Periodic;
    let res = spec.resolution();
    let osc: Vec<f64> = (0..spec.len())
        .map(|x| {
            let xi = spec.multi_index(x);
            let mut worst = 0.0f64;
            for a in 0..n {
                for step in [-1isize, 1] {
                    let k = xi[a] as isize + step;
                    let r = res[a] as isize;
                    let k = if periodic {
                        k.rem_euclid(r)
                    } else if k < 0 || k >= r {
                        continue;
                    } else {
                        k
                    };
                    let y = (x as isize + (k - xi[a] as isize) * strides[a] as isize) as usize;
                    worst = worst.max((values[x] - values[y]).abs());
                }
            }
            (worst / hmin).powf(p)
        })
        .collect();
    let radial = unit_sphere_area(n).max(2.0) * hmin.powf(p * (1.0 - s)) / (p * (1.0 - s));
    let diagonal_remainder = pairwise_sum(&osc) * cell * radial;
    Ok(SeminormEstimate { integral, diagonal_remainder, s, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::GridSpec;
    use proptest::prelude::*;

    #[test]
    fn constants_have_no_seminorm() {
        let spec = GridSpec::cube(2, 0.0, 1.0, 9, Extension::ZeroOutside).unwrap();
        for c in [0.0, 3.5] {
            let f = GridFunction::constant(spec.clone(), c).unwrap();
            let est = fractional_seminorm(&f, 0.4, 2.0).unwrap();
            assert_eq!(est.integral, 0.0);
            assert_eq!(est.diagonal_remainder, 0.0);
        }
    }

    #[test]
    fn single_node_axis_is_rejected_by_the_grid() {
        assert!(GridSpec::cube(1, 0.0, 1.0, 1, Extension::ZeroOutside).is_err());
    }

    #[test]
    fn bad_parameters() {
        let spec = GridSpec::cube(1, 0.0, 1.0, 9, Extension::ZeroOutside).unwrap();
        let f = GridFunction::constant(spec, 1.0).unwrap();
        assert!(fractional_seminorm(&f, 1.0, 2.0).is_err());
        assert!(fractional_seminorm(&f, 0.5, 0.5).is_err());
    }

    fn random_spec() -> GridSpec {
        GridSpec::new(vec![0.0, 0.0], vec![1.0, 0.7], vec![5, 4], Extension::ZeroOutside).unwrap()
    }

    proptest! {
        #[test]
        fn homogeneous_of_degree_p(v in prop::collection::vec(-3.0..3.0f64, 20), e in -3i32..4) {
            // powers of two keep the scaling exact in floating point
            let c = 2f64.powi(e);
            let spec = random_spec();
            let f = GridFunction::scalar(spec.clone(), v.clone()).unwrap();
            let g = GridFunction::scalar(spec, v.iter().map(|x| c * x).collect()).unwrap();
            let a = fractional_seminorm(&f, 0.3, 2.0).unwrap().integral;
            let b = fractional_seminorm(&g, 0.3, 2.0).unwrap().integral;
            prop_assert!((b - c * c * a).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn reflection_symmetric(v in prop::collection::vec(-3.0..3.0f64, 20)) {
            let spec = random_spec();
            let reflected: Vec<f64> = (0..20).map(|i| {
                let m = spec.multi_index(i);
                v[spec.linear_index(&[4 - m[0], m[1]])]
            }).collect();
            let a = fractional_seminorm(&GridFunction::scalar(spec.clone(), v).unwrap(), 0.6, 1.5).unwrap().integral;
            let b = fractional_seminorm(&GridFunction::scalar(spec, reflected).unwrap(), 0.6, 1.5).unwrap().integral;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }
}
