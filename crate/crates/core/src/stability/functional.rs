use crate::error::{Error, Result};
use crate::flow::{distance, domain_mask, superlevel_measure, FlowEnsemble};
use crate::harmonic::AnisotropicScale;
use crate::reduce::canonical_sum;

/// Values of a logarithmic functional at each recorded time.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FunctionalTrace {
    pub scale: AnisotropicScale,
    pub r: f64,
    pub lambda: f64,
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    /// Measure of `B_r` intersected with both sublevel sets, per time.
    pub domain_measure: Vec<f64>,
    /// Set when the domain holds no node and the trace is identically zero.
    pub empty_domain: bool,
}

/// `Phi(s) = int log(1 + |A^{-1}[X(s, x) - Xbar(s, x)]|) dx` over `B_r`
/// intersected with both sublevel sets `G_lambda`.
///
/// Each time slice is summed in sorted order, so relabeling the particles
/// leaves the trace bit-identical.
pub fn anisotropic_functional(
    ens1: &FlowEnsemble,
    ens2: &FlowEnsemble,
    scale: &AnisotropicScale,
    r: f64,
    lambda: f64,
) -> Result<FunctionalTrace> {
    if scale.split() != ens1.split() {
        return Err(Error::EnsembleMismatch("scale and ensemble splits differ".into()));
    }
    let domain = domain_mask(ens1, ens2, r, lambda)?;
    let count = domain.iter().filter(|b| **b).count();
    let cell = ens1.spec().cell_volume();
    let n = ens1.dim();
    let mut diff = vec![0.0; n];
    let phi = (0..ens1.times().len())
        .map(|k| {
            let mut terms: Vec<f64> = (0..ens1.particles())
                .filter(|&i| domain[i])
                .map(|i| {
                    let (a, b) = (ens1.position(k, i), ens2.position(k, i));
                    for j in 0..n {
                        diff[j] = a[j] - b[j];
                    }
                    scale.inverse_norm(&diff).ln_1p()
                })
                .collect();
            canonical_sum(&mut terms) * cell
        })
        .collect();
    Ok(FunctionalTrace {
        scale: *scale,
        r,
        lambda,
        times: ens1.times().to_vec(),
        phi,
        domain_measure: vec![count as f64 * cell; ens1.times().len()],
        empty_domain: count == 0,
    })
}

/// `Phi_delta(s) = int log(1 + |X - Xbar| / delta)`: the anisotropic
/// functional with `delta1 = delta2 = delta`.
pub fn log_functional(ens1: &FlowEnsemble, ens2: &FlowEnsemble, delta: f64, r: f64, lambda: f64) -> Result<FunctionalTrace> {
    let scale = AnisotropicScale::new(delta, delta, ens1.split())?;
    anisotropic_functional(ens1, ens2, &scale, r, lambda)
}

/// Superlevel measure next to its Chebyshev bound at one time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChebyshevPoint {
    pub time: f64,
    pub measure: f64,
    pub bound: f64,
}

/// `|{|X - Xbar| > gamma}| <= Phi / log(1 + gamma / delta2)` on the trace's
/// domain. Since `delta1 <= delta2`, `|A^{-1} v| >= |v| / delta2`, so every
/// counted node contributes at least the denominator to `Phi`.
pub fn chebyshev_bound(trace: &FunctionalTrace, ens1: &FlowEnsemble, ens2: &FlowEnsemble, gamma: f64) -> Result<Vec<ChebyshevPoint>> {
    if ens1.times() != trace.times.as_slice() {
        return Err(Error::EnsembleMismatch("trace and ensembles record different times".into()));
    }
    let measure = superlevel_measure(ens1, ens2, gamma, trace.r, trace.lambda)?;
    let denom = (gamma / trace.scale.delta2()).ln_1p();
    Ok(trace
        .times
        .iter()
        .zip(&trace.phi)
        .zip(measure)
        .map(|((&time, &phi), measure)| ChebyshevPoint { time, measure, bound: phi / denom })
        .collect())
}

/// Largest recorded distance between the flows on the domain.
pub fn max_separation(ens1: &FlowEnsemble, ens2: &FlowEnsemble, r: f64, lambda: f64) -> Result<f64> {
    let domain = domain_mask(ens1, ens2, r, lambda)?;
    let mut worst = 0.0f64;
    for k in 0..ens1.times().len() {
        for i in (0..ens1.particles()).filter(|&i| domain[i]) {
            worst = worst.max(distance(ens1.position(k, i), ens2.position(k, i)));
        }
    }
    Ok(worst)
}
