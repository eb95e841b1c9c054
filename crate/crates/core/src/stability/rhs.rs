use super::ParameterSchedule;
use crate::error::{Error, Result};
use crate::flow::{sublevel_mask, FlowEnsemble};
use crate::harmonic::{anisotropic_u_block, lp_norm, mollify_x1, AnisotropicScale, DerivativeBlock, MollifierKernel};
use crate::reduce::{pairwise_sum, trapezoid};
use crate::space::grid::partial_derivative;
use crate::space::{sample_to_grid, GridFunction, GridSpec, PartiallyRegularField};

/// Where and how finely the right-hand side is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TheoremInputs {
    pub r: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Equispaced samples of `[0, T]` for the time integrals, at least 2.
    pub time_samples: usize,
}

/// Itemized right-hand side of the superlevel estimate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TheoremRhsReport {
    /// `||b - bbar||_{L^1((0,T) x B_lambda)} / (delta1 log(1 + gamma/delta2))`.
    pub term_difference: f64,
    /// Terms 1 to 5: mollification error, derivative blow-up, bounded terms,
    /// and the two measures `|B_r \ G_lambda|`.
    pub terms: [f64; 5],
    pub sigma: f64,
    pub sigma_bar: f64,
    pub psi: f64,
    /// Measured bounded-term constant.
    pub c_bound: f64,
    pub difference_norm: f64,
    pub total: f64,
    pub schedule: ParameterSchedule,
    pub inputs: TheoremInputs,
}

/// `1` on `B_{2 lambda}`, `0` outside `B_{2 lambda + 1}`, a C^1 cubic ramp
/// in between.
pub fn cutoff(lambda: f64, x: &[f64]) -> f64 {
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u = (rho - 2.0 * lambda).clamp(0.0, 1.0);
    1.0 - u * u * (3.0 - 2.0 * u)
}

fn block_samples(f: &PartiallyRegularField, spec: &GridSpec, t: f64, first: bool, weight: impl Fn(&[f64]) -> f64 + Sync) -> Result<GridFunction> {
    let split = f.split();
    let comps = if first { split.n1() } else { split.n2() };
    let eval = |t: f64, x: &[f64], out: &mut [f64]| {
        let (x1, x2) = split.blocks(x);
        if first {
            (f.b1())(t, x1, out);
        } else {
            (f.b2())(t, x1, x2, out);
        }
        let w = weight(x);
        out.iter_mut().for_each(|v| *v *= w);
    };
    sample_to_grid(&eval, spec, t, comps)
}

fn masked_l1(spec: &GridSpec, values: &[f64], comps: usize, mask: &[bool]) -> Result<f64> {
    let mags: Vec<f64> = values.chunks_exact(comps).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    lp_norm(spec, &mags, 1.0, Some(mask))
}

/// Per-time ingredients: `||b - bbar||`, `sigma`, `sigma_bar`, `psi`, and the
/// bounded-term integrand.
#[allow(clippy::too_many_arguments)]
fn slice(
    b: &PartiallyRegularField,
    bbar: &PartiallyRegularField,
    spec: &GridSpec,
    kernel: &MollifierKernel,
    scale: &AnisotropicScale,
    inner: &[bool],
    outer: &[bool],
    lambda: f64,
    t: f64,
) -> Result<[f64; 5]> {
    let n1 = b.split().n1();
    let n2 = b.split().n2();
    let one = |_: &[f64]| 1.0;

    let b2 = block_samples(b, spec, t, false, one)?;
    let b2bar = block_samples(bbar, spec, t, false, one)?;
    let b1 = block_samples(b, spec, t, true, one)?;
    let b1bar = block_samples(bbar, spec, t, true, one)?;
    let b2e = mollify_x1(&b2, kernel)?.function;
    let b2bare = mollify_x1(&b2bar, kernel)?.function;

    // |b - bbar| over both blocks
    let diff: Vec<f64> = (0..spec.len())
        .map(|i| {
            let d1: f64 = (0..n1).map(|c| (b1.values()[i * n1 + c] - b1bar.values()[i * n1 + c]).powi(2)).sum();
            let d2: f64 = (0..n2).map(|c| (b2.values()[i * n2 + c] - b2bar.values()[i * n2 + c]).powi(2)).sum();
            (d1 + d2).sqrt()
        })
        .collect();
    let difference = lp_norm(spec, &diff, 1.0, Some(inner))?;

    let sub = |a: &GridFunction, e: &GridFunction| -> Vec<f64> { a.values().iter().zip(e.values()).map(|(x, y)| x - y).collect() };
    let sigma = masked_l1(spec, &sub(&b2, &b2e), n2, inner)?;
    let sigma_bar = masked_l1(spec, &sub(&b2bar, &b2bare), n2, inner)?;

    // psi: |D_{x1} b2^eps| over B_{2 lambda + 1}
    let psi = lp_norm(spec, &x1_gradient_norm(spec, &b2e, n1)?, 1.0, Some(outer))?;

    // bounded terms: U of the cut-off first block and of the x2 derivatives of b2^eps
    let chi: Vec<f64> = (0..spec.len()).map(|i| cutoff(lambda, &spec.node(i))).collect();
    let b1_cut = block_samples(b, spec, t, true, |x| cutoff(lambda, x))?;
    let b2e_cut: Vec<f64> = b2e.values().iter().enumerate().map(|(k, v)| v * chi[k / n2]).collect();
    let b2e_cut = GridFunction::new(spec.clone(), n2, b2e_cut)?;
    let u_p = anisotropic_u_block(&b1_cut, scale, DerivativeBlock::X1)?;
    let u_r = anisotropic_u_block(&b2e_cut, scale, DerivativeBlock::X2)?;
    let bounded = lp_norm(spec, u_p.values(), 1.0, Some(inner))? / scale.delta1()
        + lp_norm(spec, u_r.values(), 1.0, Some(inner))? / scale.delta2();
    Ok([difference, sigma, sigma_bar, psi, bounded])
}

/// Evaluates every measurable ingredient of the superlevel estimate for the
/// pair `b`, `bbar` under `schedule`, and assembles the itemized right-hand
/// side. The grid must contain the ball of radius `2 lambda + 1`; `ens` and
/// `ens_bar` are the flows whose sublevel sets give terms 4 and 5.
pub fn theorem_rhs(
    b: &PartiallyRegularField,
    bbar: &PartiallyRegularField,
    schedule: &ParameterSchedule,
    spec: &GridSpec,
    inputs: &TheoremInputs,
    ens: &FlowEnsemble,
    ens_bar: &FlowEnsemble,
) -> Result<TheoremRhsReport> {
    let split = b.split();
    if bbar.split() != split || spec.dim() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), got: spec.dim() });
    }
    let spec = match spec.split() {
        Some(s) if s == split => spec.clone(),
        Some(_) => return Err(Error::InvalidGrid("grid split differs from the field split".into())),
        None => spec.clone().with_split(split)?,
    };
    let TheoremInputs { r, lambda, gamma, time_samples } = *inputs;
    if !(r > 0.0 && lambda > 0.0 && gamma > 0.0) || time_samples < 2 {
        return Err(Error::InvalidArgument("r, lambda, gamma must be positive and time_samples at least 2".into()));
    }
    let reach = 2.0 * lambda + 1.0;
    for axis in 0..spec.dim() {
        if spec.lower(axis) > -reach || spec.upper(axis) < reach {
            return Err(Error::InvalidGrid(format!("axis {axis} does not contain the ball of radius {reach}")));
        }
    }
    let epsilon = schedule.epsilon();
    let kernel = MollifierKernel::standard(split.n1(), epsilon.max(f64::MIN_POSITIVE))?;
    let scale = AnisotropicScale::new(schedule.delta1(), schedule.delta2(), split)?;
    let inner = spec.ball_mask(lambda);
    let outer = spec.ball_mask(reach);

    let horizon = b.horizon().min(bbar.horizon());
    let dt = horizon / (time_samples - 1) as f64;
    let mut series: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(time_samples)).collect();
    for j in 0..time_samples {
        let t = if j + 1 == time_samples { horizon } else { j as f64 * dt };
        let values = slice(b, bbar, &spec, &kernel, &scale, &inner, &outer, lambda, t)?;
        for (s, v) in series.iter_mut().zip(values) {
            s.push(v);
        }
    }
    let [difference_norm, sigma, sigma_bar, psi, c_bound] = [0, 1, 2, 3, 4].map(|k| trapezoid(&series[k], dt));

    let delta1 = schedule.delta1();
    let log_g = (gamma / schedule.delta2()).ln_1p();
    let beta = schedule.beta();
    let term2 = if psi == 0.0 { 0.0 } else { (beta * psi * (1.0 / (beta * psi * delta1)).ln() / log_g).max(0.0) };
    let terms = [
        (sigma + sigma_bar) / (delta1 * log_g),
        term2,
        c_bound / log_g,
        sublevel_mask(ens, lambda)?.measure_outside(r),
        sublevel_mask(ens_bar, lambda)?.measure_outside(r),
    ];
    let term_difference = difference_norm / (delta1 * log_g);
    let mut all = terms.to_vec();
    all.push(term_difference);
    Ok(TheoremRhsReport {
        term_difference,
        terms,
        sigma,
        sigma_bar,
        psi,
        c_bound,
        difference_norm,
        total: pairwise_sum(&all),
        schedule: *schedule,
        inputs: *inputs,
    })
}

/// Time-integrated mollification error and derivative blow-up of `b2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegularizationNorms {
    pub epsilon: f64,
    /// `||b2 - b2^eps||_{L^1((0,T) x B_lambda)}`.
    pub sigma: f64,
    /// `||D_{x1} b2^eps||_{L^1((0,T) x B_{2 lambda + 1})}`.
    pub psi: f64,
}

/// `sigma(eps)` and `psi(eps)` alone, for rate studies.
pub fn regularization_norms(b: &PartiallyRegularField, spec: &GridSpec, epsilon: f64, lambda: f64, time_samples: usize) -> Result<RegularizationNorms> {
    if time_samples < 2 {
        return Err(Error::InvalidArgument("time_samples must be at least 2".into()));
    }
    let split = b.split();
    let spec = match spec.split() {
        Some(_) => spec.clone(),
        None => spec.clone().with_split(split)?,
    };
    let kernel = MollifierKernel::standard(split.n1(), epsilon)?;
    let inner = spec.ball_mask(lambda);
    let outer = spec.ball_mask(2.0 * lambda + 1.0);
    let dt = b.horizon() / (time_samples - 1) as f64;
    let mut sigma = Vec::with_capacity(time_samples);
    let mut psi = Vec::with_capacity(time_samples);
    for j in 0..time_samples {
        let t = if j + 1 == time_samples { b.horizon() } else { j as f64 * dt };
        let b2 = block_samples(b, &spec, t, false, |_| 1.0)?;
        let b2e = mollify_x1(&b2, &kernel)?.function;
        let diff: Vec<f64> = b2.values().iter().zip(b2e.values()).map(|(x, y)| x - y).collect();
        sigma.push(masked_l1(&spec, &diff, split.n2(), &inner)?);
        psi.push(lp_norm(&spec, &x1_gradient_norm(&spec, &b2e, split.n1())?, 1.0, Some(&outer))?);
    }
    Ok(RegularizationNorms { epsilon, sigma: trapezoid(&sigma, dt), psi: trapezoid(&psi, dt) })
}

fn x1_gradient_norm(spec: &GridSpec, f: &GridFunction, n1: usize) -> Result<Vec<f64>> {
    let mut q2 = vec![0.0; spec.len()];
    for c in 0..f.components() {
        let comp = f.component(c);
        for axis in 0..n1 {
            for (acc, d) in q2.iter_mut().zip(partial_derivative(spec, &comp, axis)?) {
                *acc += d * d;
            }
        }
    }
    Ok(q2.into_iter().map(f64::sqrt).collect())
}

/// Smallest `lambda` of the ladder with `|B_r \ G_lambda| + |B_r \ Gbar_lambda| <= 2 eta / 5`.
pub fn choose_lambda(ens: &FlowEnsemble, ens_bar: &FlowEnsemble, r: f64, eta: f64, ladder: &[f64]) -> Result<f64> {
    for &lambda in ladder {
        let tail = sublevel_mask(ens, lambda)?.measure_outside(r) + sublevel_mask(ens_bar, lambda)?.measure_outside(r);
        if tail <= 0.4 * eta {
            return Ok(lambda);
        }
    }
    Err(Error::NoFeasibleParameter(format!("no lambda in the ladder brings terms 4 + 5 below {}", 0.4 * eta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(1.0, &[1.5, 0.0]), 1.0);
        assert_eq!(cutoff(1.0, &[2.0, 0.0]), 1.0);
        assert_eq!(cutoff(1.0, &[3.0, 0.0]), 0.0);
        assert!((cutoff(1.0, &[2.5, 0.0]) - 0.5).abs() < 1e-15);
    }
}
