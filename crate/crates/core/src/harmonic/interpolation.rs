use super::norms::{lp_norm, region_measure, weak_l1};
use crate::error::{Error, Result};
use crate::space::GridFunction;

/// `||u||_{L^1}` against its weak-`L^1` / `L^p` interpolation bound.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
}

/// For nonnegative `u` on a region `Omega` of finite measure,
///
/// `||u||_1 <= p/(p-1) |||u||| [1 + log(||u||_p |Omega|^{1-1/p} / |||u|||)]`,
///
/// with `p/(p-1) = 1` and `|Omega|^{1-1/p} = |Omega|` for `p = inf`.
pub fn interpolation_bound(u: &GridFunction, p: f64, mask: Option<&[bool]>) -> Result<InterpolationReport> {
    let values = u.require_scalar()?;
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {p} must exceed 1")));
    }
    if let Some(node) = values.iter().position(|v| *v < 0.0) {
        return Err(Error::NegativeValue { node, value: values[node] });
    }
    let spec = u.spec();
    let omega = region_measure(spec, mask)?;
    let weak = weak_l1(spec, values, mask)?;
    if weak == 0.0 {
        return Ok(InterpolationReport { lhs: 0.0, rhs: 0.0 });
    }
    let lhs = lp_norm(spec, values, 1.0, mask)?;
    let lp = lp_norm(spec, values, p, mask)?;
    let (factor, volume) = if p.is_infinite() { (1.0, omega) } else { (p / (p - 1.0), omega.powf(1.0 - 1.0 / p)) };
    let rhs = factor * weak * (1.0 + (lp * volume / weak).ln());
    Ok(InterpolationReport { lhs, rhs })
}
