use super::mollify::{mollify_x1, MollifierKernel};
use super::norms::lp_norm;
use crate::error::{Error, Result};
use crate::space::grid::partial_derivative;
use crate::space::GridFunction;

/// Norms measured at one mollification scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RateSample {
    pub epsilon: f64,
    /// `||f - f^eps||_{L^p}`.
    pub conv_norm: f64,
    /// `||D_{x1} f^eps||_{L^p}`.
    pub blowup_norm: f64,
}

/// Log-log slopes of the convergence and blow-up norms against `eps`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RateFit {
    pub fit_conv: f64,
    pub fit_blowup: f64,
    pub r2_conv: f64,
    pub r2_blowup: f64,
    pub s: f64,
    pub p: f64,
    pub samples: Vec<RateSample>,
}

/// Least-squares slope and coefficient of determination of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

/// Measures how fast `f^eps -> f` and how fast `D f^eps` grows as `eps -> 0`,
/// mollifying in the `x1` block. For `f` in `W^{s,p}` the expected slopes are
/// at least `s` and at least `s - 1`.
pub fn rate_fit(f: &GridFunction, s: f64, p: f64, epsilons: &[f64]) -> Result<RateFit> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 scales, got {}", epsilons.len())));
    }
    let lo = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().copied().fold(0.0, f64::max);
    if !(hi >= 4.0 * lo) {
        return Err(Error::InvalidArgument(format!("scales [{lo}, {hi}] span less than two octaves")));
    }
    let spec = f.spec();
    let n1 = spec.x1_dims();
    let comps = f.components();
    let base = MollifierKernel::standard(n1, lo)?;
    let mut samples = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let smooth = mollify_x1(f, &base.at_scale(eps)?)?.function;
        let diff: Vec<f64> = f.values().iter().zip(smooth.values()).map(|(a, b)| a - b).collect();
        let diff = GridFunction::new(spec.clone(), comps, diff)?.magnitudes();
        let mut grad2 = vec![0.0; spec.len()];
        for c in 0..comps {
            let component = smooth.component(c);
            for axis in 0..n1 {
                for (g, d) in grad2.iter_mut().zip(partial_derivative(spec, &component, axis)?) {
                    *g += d * d;
                }
            }
        }
        let grad: Vec<f64> = grad2.into_iter().map(f64::sqrt).collect();
        let conv_norm = lp_norm(spec, &diff, p, None)?;
        let blowup_norm = lp_norm(spec, &grad, p, None)?;
        if conv_norm == 0.0 || blowup_norm == 0.0 {
            return Err(Error::VanishingNorm { epsilon: eps });
        }
        samples.push(RateSample { epsilon: eps, conv_norm, blowup_norm });
    }
    let x: Vec<f64> = samples.iter().map(|r| r.epsilon.ln()).collect();
    let conv: Vec<f64> = samples.iter().map(|r| r.conv_norm.ln()).collect();
    let blow: Vec<f64> = samples.iter().map(|r| r.blowup_norm.ln()).collect();
    let (fit_conv, r2_conv) = linear_fit(&x, &conv);
    let (fit_blowup, r2_blowup) = linear_fit(&x, &blow);
    Ok(RateFit { fit_conv, fit_blowup, r2_conv, r2_blowup, s, p, samples })
}
