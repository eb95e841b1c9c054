use super::FlowEnsemble;
use crate::error::{Error, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Particles whose recorded trajectory stays in the closed ball of radius
/// `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SublevelMask {
    pub lambda: f64,
    pub mask: Vec<bool>,
    initial_norms: Vec<f64>,
    cell_volume: f64,
}

impl SublevelMask {
    /// `|B_r \ G_lambda|`: cell volume times the number of initial nodes in
    /// the closed ball of radius `r` whose trajectory leaves the ball of
    /// radius `lambda`.
    pub fn measure_outside(&self, r: f64) -> f64 {
        let count = self.initial_norms.iter().zip(&self.mask).filter(|(x, inside)| **x <= r && !**inside).count();
        count as f64 * self.cell_volume
    }

    /// Number of particles in the sublevel set.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }
}

/// Sublevel set `G_lambda` from the sup of `|X|` over recorded times.
/// `lambda = inf` keeps every particle.
pub fn sublevel_mask(ens: &FlowEnsemble, lambda: f64) -> Result<SublevelMask> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("sublevel radius {lambda} must be positive")));
    }
    let p = ens.particles();
    let mut sup = vec![0.0f64; p];
    for k in 0..ens.times().len() {
        for (i, s) in sup.iter_mut().enumerate() {
            *s = s.max(norm(ens.position(k, i)));
        }
    }
    Ok(SublevelMask {
        lambda,
        mask: sup.into_iter().map(|s| s <= lambda).collect(),
        initial_norms: ens.spec().node_norms(),
        cell_volume: ens.spec().cell_volume(),
    })
}

/// Per recorded time, the measure of initial nodes in `B_r` lying in both
/// sublevel sets where the flows are more than `gamma` apart.
pub fn superlevel_measure(ens1: &FlowEnsemble, ens2: &FlowEnsemble, gamma: f64, r: f64, lambda: f64) -> Result<Vec<f64>> {
    ens1.check_compatible(ens2)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {gamma} must be positive")));
    }
    let domain = domain_mask(ens1, ens2, r, lambda)?;
    let cell = ens1.spec().cell_volume();
    Ok((0..ens1.times().len())
        .map(|k| {
            let count = (0..ens1.particles())
                .filter(|&i| domain[i] && distance(ens1.position(k, i), ens2.position(k, i)) > gamma)
                .count();
            count as f64 * cell
        })
        .collect())
}

/// `B_r` intersected with both sublevel sets, per initial node.
pub fn domain_mask(ens1: &FlowEnsemble, ens2: &FlowEnsemble, r: f64, lambda: f64) -> Result<Vec<bool>> {
    ens1.check_compatible(ens2)?;
    let m1 = sublevel_mask(ens1, lambda)?;
    let m2 = sublevel_mask(ens2, lambda)?;
    Ok(ens1
        .spec()
        .node_norms()
        .into_iter()
        .enumerate()
        .map(|(i, x)| x <= r && m1.mask[i] && m2.mask[i])
        .collect())
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
