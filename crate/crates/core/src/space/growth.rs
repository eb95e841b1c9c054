use std::sync::Arc;

use rayon::prelude::*;

use super::{GridSpec, PartiallyRegularField};
use crate::error::{Error, Result};
use crate::reduce::{pairwise_sum, trapezoid};

type VectorFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// A splitting `b(t, x) / (1 + |x|) = c1(t, x) + c2(t, x)` with `c1` meant to
/// be integrable in space and `c2` bounded.
#[derive(Clone)]
pub struct GrowthDecomposition {
    c1: Arc<VectorFn>,
    c2: Arc<VectorFn>,
}

/// Outcome of checking a decomposition on a grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrowthReport {
    /// `max |c1 + c2 - b / (1 + |x|)|` over sampled times and nodes.
    pub residual_sup: f64,
    /// `int_0^T int |c1| dx dt`.
    pub norm_c1: f64,
    /// `int_0^T sup_x |c2| dt`.
    pub norm_c2: f64,
}

impl GrowthDecomposition {
    pub fn new<F1, F2>(c1: F1, c2: F2) -> Self
    where
        F1: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        F2: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        GrowthDecomposition { c1: Arc::new(c1), c2: Arc::new(c2) }
    }

    /// `c1 = 0`, `c2 = b / (1 + |x|)`: the natural choice for bounded fields.
    pub fn bounded(field: &PartiallyRegularField) -> Self {
        let b = field.clone();
        GrowthDecomposition::new(
            |_, _, out: &mut [f64]| out.fill(0.0),
            move |t, x, out: &mut [f64]| {
                if b.eval_into(t, x, out).is_err() {
                    out.fill(f64::NAN);
                    return;
                }
                let w = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
                out.iter_mut().for_each(|v| *v /= w);
            },
        )
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Checks the decomposition pointwise on `spec` at `time_samples` equally
/// spaced times in `[0, T]` and integrates its norms (trapezoid in time, cell
/// sum or max in space).
pub fn verify_growth_decomposition(
    field: &PartiallyRegularField,
    dec: &GrowthDecomposition,
    spec: &GridSpec,
    time_samples: usize,
    tolerance: f64,
) -> Result<GrowthReport> {
    if time_samples < 2 {
        return Err(Error::InvalidArgument("time_samples must be at least 2".into()));
    }
    let n = field.dim();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.dim() });
    }
    let horizon = field.horizon();
    let dt = horizon / (time_samples - 1) as f64;
    let cell = spec.cell_volume();

    let mut residual_sup = 0.0f64;
    let mut l1_c1 = Vec::with_capacity(time_samples);
    let mut sup_c2 = Vec::with_capacity(time_samples);
    for j in 0..time_samples {
        let t = if j + 1 == time_samples { horizon } else { j as f64 * dt };
        // (residual, |c1|, |c2|) per node
        let per_node: Vec<(f64, f64, f64)> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]),
                |(x, b, c1, c2), node| {
                    spec.node_into(node, x);
                    field.eval_into(t, x, b)?;
                    (dec.c1)(t, x, c1);
                    (dec.c2)(t, x, c2);
                    let w = 1.0 + norm(x);
                    let mut r2 = 0.0;
                    for k in 0..n {
                        let d = c1[k] + c2[k] - b[k] / w;
                        r2 += d * d;
                    }
                    let out = (r2.sqrt(), norm(c1), norm(c2));
                    if out.0.is_finite() && out.1.is_finite() && out.2.is_finite() {
                        Ok(out)
                    } else {
                        Err(Error::NonFiniteSample { node })
                    }
                },
            )
            .collect::<Result<_>>()?;
        residual_sup = per_node.iter().fold(residual_sup, |m, r| m.max(r.0));
        let c1_abs: Vec<f64> = per_node.iter().map(|r| r.1).collect();
        l1_c1.push(cell * pairwise_sum(&c1_abs));
        sup_c2.push(per_node.iter().fold(0.0f64, |m, r| m.max(r.2)));
    }
    if residual_sup > tolerance {
        return Err(Error::DecompositionInvalid { residual: residual_sup, tolerance });
    }
    Ok(GrowthReport { residual_sup, norm_c1: trapezoid(&l1_c1, dt), norm_c2: trapezoid(&sup_c2, dt) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Extension, SpaceSplit};

    fn grid() -> GridSpec {
        GridSpec::cube(2, -1.0, 1.0, 21, Extension::ZeroOutside).unwrap()
    }

    #[test]
    fn zero_field_zero_decomposition() {
        let b = PartiallyRegularField::zero(SpaceSplit::planar(), 1.0).unwrap();
        let dec = GrowthDecomposition::new(|_, _, o: &mut [f64]| o.fill(0.0), |_, _, o: &mut [f64]| o.fill(0.0));
        let r = verify_growth_decomposition(&b, &dec, &grid(), 3, 0.0).unwrap();
        assert_eq!((r.residual_sup, r.norm_c1, r.norm_c2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn linear_first_block_bounded_decomposition() {
        let b = PartiallyRegularField::new(
            SpaceSplit::planar(),
            0.75,
            2.0,
            1.0,
            |_, x1, o| o[0] = x1[0],
            |_, _, _, o| o[0] = 0.0,
        )
        .unwrap();
        let r = verify_growth_decomposition(&b, &GrowthDecomposition::bounded(&b), &grid(), 4, 1e-14).unwrap();
        assert_eq!(r.residual_sup, 0.0);
        assert_eq!(r.norm_c1, 0.0);
        // max |x1| / (1 + |x|) over the nodes of [-1, 1]^2 is attained at (+-1, 0)
        let spec = grid();
        let oracle = (0..spec.len())
            .map(|i| {
                let x = spec.node(i);
                x[0].abs() / (1.0 + x[0].hypot(x[1]))
            })
            .fold(0.0, f64::max);
        assert!((oracle - 0.5).abs() < 1e-15);
        assert!((r.norm_c2 - oracle).abs() < 1e-14);
    }

    #[test]
    fn wrong_decomposition_is_rejected() {
        let b = PartiallyRegularField::new(
            SpaceSplit::planar(),
            0.75,
            2.0,
            1.0,
            |_, _, o| o[0] = 1.0,
            |_, _, _, o| o[0] = 0.0,
        )
        .unwrap();
        let dec = GrowthDecomposition::new(|_, _, o: &mut [f64]| o.fill(0.0), |_, _, o: &mut [f64]| o.fill(0.0));
        let err = verify_growth_decomposition(&b, &dec, &grid(), 2, 1e-9).unwrap_err();
        assert!(matches!(err, Error::DecompositionInvalid { .. }));
    }
}
