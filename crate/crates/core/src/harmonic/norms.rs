use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;
use crate::space::{GridFunction, GridSpec};

/// Norms of a scalar grid function over a region of the box.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormReport {
    pub l1: f64,
    pub lp: f64,
    pub p: f64,
    pub weak_m1: f64,
    pub domain_measure: f64,
}

fn masked<'a>(values: &'a [f64], mask: Option<&'a [bool]>) -> Result<impl Iterator<Item = f64> + 'a> {
    if let Some(m) = mask {
        if m.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: values.len(), got: m.len() });
        }
        if !m.iter().any(|b| *b) {
            return Err(Error::EmptyRegion);
        }
    }
    Ok(values.iter().enumerate().filter(move |(i, _)| mask.is_none_or(|m| m[*i])).map(|(_, v)| v.abs()))
}

/// Measure of the masked region, cell count times cell volume.
pub fn region_measure(spec: &GridSpec, mask: Option<&[bool]>) -> Result<f64> {
    let count = match mask {
        Some(m) => {
            if m.len() != spec.len() {
                return Err(Error::DimensionMismatch { expected: spec.len(), got: m.len() });
            }
            m.iter().filter(|b| **b).count()
        }
        None => spec.len(),
    };
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(count as f64 * spec.cell_volume())
}

/// `L^p` norm of node values by cell quadrature; `p = inf` gives the sup.
pub fn lp_norm(spec: &GridSpec, values: &[f64], p: f64, mask: Option<&[bool]>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {p} must be at least 1")));
    }
    let it = masked(values, mask)?;
    if p.is_infinite() {
        return Ok(it.fold(0.0, f64::max));
    }
    let terms: Vec<f64> = if p == 1.0 { it.collect() } else { it.map(|v| v.powf(p)).collect() };
    let integral = pairwise_sum(&terms) * spec.cell_volume();
    Ok(if p == 1.0 { integral } else { integral.powf(1.0 / p) })
}

/// Weak-`L^1` quasi-norm `sup_l l * |{|f| > l}|` on the grid: the supremum is
/// approached from below each attained value `v`, giving `v * |{|f| >= v}|`.
pub fn weak_l1(spec: &GridSpec, values: &[f64], mask: Option<&[bool]>) -> Result<f64> {
    let mut v: Vec<f64> = masked(values, mask)?.collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    for i in 0..v.len() {
        // last index of each run of equal values counts the whole level set
        if i + 1 == v.len() || v[i + 1] != v[i] {
            best = best.max(v[i] * (i + 1) as f64);
        }
    }
    Ok(best * spec.cell_volume())
}

/// Weak-`L^1` norm of a scalar grid function.
pub fn weak_l1_norm(f: &GridFunction, mask: Option<&[bool]>) -> Result<f64> {
    weak_l1(f.spec(), f.require_scalar()?, mask)
}

/// `L^1`, `L^p` and weak-`L^1` norms together.
pub fn norm_report(f: &GridFunction, p: f64, mask: Option<&[bool]>) -> Result<NormReport> {
    let values = f.require_scalar()?;
    let spec = f.spec();
    Ok(NormReport {
        l1: lp_norm(spec, values, 1.0, mask)?,
        lp: lp_norm(spec, values, p, mask)?,
        p,
        weak_m1: weak_l1(spec, values, mask)?,
        domain_measure: region_measure(spec, mask)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Extension;
    use proptest::prelude::*;

    fn unit_cells(n: usize) -> GridSpec {
        // spacing 1, so the cell volume is 1
        GridSpec::new(vec![0.0], vec![(n - 1) as f64], vec![n], Extension::ZeroOutside).unwrap()
    }

    #[test]
    fn constant_on_a_region() {
        let spec = unit_cells(10);
        let f = GridFunction::constant(spec, 2.0).unwrap();
        assert_eq!(weak_l1_norm(&f, None).unwrap(), 20.0);
        let mask: Vec<bool> = (0..10).map(|i| i < 3).collect();
        assert_eq!(weak_l1_norm(&f, Some(&mask)).unwrap(), 6.0);
    }

    #[test]
    fn zero_function() {
        let f = GridFunction::constant(unit_cells(4), 0.0).unwrap();
        assert_eq!(weak_l1_norm(&f, None).unwrap(), 0.0);
    }

    #[test]
    fn two_level_sets() {
        // value 3 on measure 1 and value 1 on measure 4: candidates 3 and 5
        let f = GridFunction::scalar(unit_cells(5), vec![1.0, 3.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(weak_l1_norm(&f, None).unwrap(), 5.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let f = GridFunction::constant(unit_cells(4), 1.0).unwrap();
        assert!(matches!(weak_l1_norm(&f, Some(&[false; 4])), Err(Error::EmptyRegion)));
    }

    #[test]
    fn report_collects_everything() {
        let f = GridFunction::scalar(unit_cells(4), vec![1.0, -1.0, 2.0, 0.0]).unwrap();
        let r = norm_report(&f, 2.0, None).unwrap();
        assert_eq!(r.l1, 4.0);
        assert!((r.lp - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.weak_m1, 3.0);
        assert_eq!(r.domain_measure, 4.0);
        assert_eq!(lp_norm(f.spec(), f.values(), f64::INFINITY, None).unwrap(), 2.0);
    }

    proptest! {
        #[test]
        fn weak_norm_is_below_l1(values in prop::collection::vec(-10.0..10.0f64, 1..60)) {
            let n = values.len().max(2);
            let mut v = values.clone();
            v.resize(n, 0.0);
            let spec = GridSpec::new(vec![0.0], vec![1.3], vec![n], Extension::ZeroOutside).unwrap();
            let weak = weak_l1(&spec, &v, None).unwrap();
            let l1 = lp_norm(&spec, &v, 1.0, None).unwrap();
            prop_assert!(weak <= l1 * (1.0 + 1e-12));
        }
    }
}
