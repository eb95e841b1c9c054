//! The scenario suite. Each scenario reads its config section, runs the
//! kernels stage by stage, and fills a [`ScenarioReport`].

use roughflow::flow::{integrate_flow, superlevel_measure, FlowEnsemble};
use roughflow::harmonic::{fractional_seminorm, lp_norm, AnisotropicScale};
use roughflow::space::{Extension, GridFunction, GridSpec};
use roughflow::stability::{anisotropic_functional, chebyshev_bound};

use crate::config::{ExperimentConfig, GridConfig, ScenarioKind, TimeConfig};
use crate::fields::FieldSpec;
use crate::report::{Relation, ScenarioReport, Table};
use crate::{LabError, StageContext};

mod flows;
mod harmonic;
mod theorem;

/// Slack of the Chebyshev check, relative to the domain measure.
pub const CHEBYSHEV_SLACK: f64 = 1e-12;

/// Runs the scenario named in `config.scenario`.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioReport, LabError> {
    let kind = config.scenario.ok_or_else(|| LabError::Config("no scenario selected".into()))?;
    let mut report = ScenarioReport::new(kind, config);
    match kind {
        ScenarioKind::Rates => harmonic::rates(config, &mut report)?,
        ScenarioKind::Maximal => harmonic::maximal(config, &mut report)?,
        ScenarioKind::LemmaChecks => harmonic::lemma_checks(config, &mut report)?,
        ScenarioKind::Uniqueness => flows::uniqueness(config, &mut report)?,
        ScenarioKind::Stability => flows::stability(config, &mut report)?,
        ScenarioKind::Compactness => flows::compactness(config, &mut report)?,
        ScenarioKind::TheoremBound => theorem::theorem_bound(config, &mut report)?,
        ScenarioKind::Existence => flows::existence(config, &mut report)?,
    }
    Ok(report)
}

/// Same config with `scenario` set to `kind`.
pub fn for_scenario(config: &ExperimentConfig, kind: ScenarioKind) -> ExperimentConfig {
    ExperimentConfig { scenario: Some(kind), ..config.clone() }
}

pub(crate) fn flow(
    report: &mut ScenarioReport,
    stage: &str,
    field: &FieldSpec,
    epsilon: Option<f64>,
    grid: &GridConfig,
    time: &TimeConfig,
    step: f64,
) -> Result<FlowEnsemble, LabError> {
    let b = field.build(time.horizon, epsilon)?;
    let spec = grid.spec()?;
    report.timed(stage, || integrate_flow(&b, &spec, &time.times(), time.scheme, step)).stage(stage)
}

/// Largest superlevel measure over the recorded times, on `B_r`.
pub(crate) fn sup_superlevel(a: &FlowEnsemble, b: &FlowEnsemble, gamma: f64, r: f64) -> Result<f64, LabError> {
    let m = superlevel_measure(a, b, gamma, r, f64::INFINITY).stage("superlevel")?;
    Ok(m.into_iter().fold(0.0, f64::max))
}

/// Accumulates Chebyshev checks of flow pairs over a sweep of scales.
pub(crate) struct ChebyshevLog {
    table: Table,
    violations: usize,
}

impl ChebyshevLog {
    pub fn new() -> Self {
        ChebyshevLog {
            table: Table::new(&["pair", "delta1", "delta2", "time", "measure", "bound", "domain_measure"]),
            violations: 0,
        }
    }

    pub fn check(&mut self, pair: usize, a: &FlowEnsemble, b: &FlowEnsemble, gamma: f64, r: f64, scales: &[[f64; 2]]) -> Result<(), LabError> {
        for &[d1, d2] in scales {
            let scale = AnisotropicScale::new(d1, d2, a.split()).stage("chebyshev")?;
            let trace = anisotropic_functional(a, b, &scale, r, f64::INFINITY).stage("chebyshev")?;
            let points = chebyshev_bound(&trace, a, b, gamma).stage("chebyshev")?;
            for (p, dom) in points.iter().zip(&trace.domain_measure) {
                if p.measure > p.bound + CHEBYSHEV_SLACK * dom {
                    self.violations += 1;
                }
                self.table.push(vec![pair as f64, d1, d2, p.time, p.measure, p.bound, *dom]);
            }
        }
        Ok(())
    }

    pub fn finish(self, report: &mut ScenarioReport) {
        report.verdict("chebyshev", "violations", self.violations as f64, Relation::AtMost(0.0));
        report.tables.insert("chebyshev".into(), self.table);
    }
}

/// `||g||_{L^1} + [g]_{W^{s,1}}` of `x1 -> b2(0, x1, 0)` on `[-r, r]`.
pub(crate) fn fractional_norm(field: &FieldSpec, horizon: f64, s: f64, r: f64, resolution: usize) -> Result<f64, LabError> {
    let b = field.build(horizon, None)?;
    let spec = GridSpec::new(vec![-r], vec![r], vec![resolution], Extension::ZeroOutside)?;
    let g = GridFunction::from_fn(spec.clone(), |x| {
        let mut o = [0.0];
        (b.b2())(0.0, x, &[0.0], &mut o);
        o[0]
    })?;
    let l1 = lp_norm(&spec, g.values(), 1.0, None)?;
    let semi = fractional_seminorm(&g, s, 1.0).stage("fractional norm")?;
    Ok(l1 + semi.seminorm())
}

/// Largest increase between consecutive entries; `<= 0` when nonincreasing.
pub(crate) fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// `max / min` of positive values.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increases_and_spreads() {
        assert_eq!(max_increase(&[3.0, 2.0, 2.0, 0.0]), 0.0);
        assert_eq!(max_increase(&[1.0, 1.5, 1.0]), 0.5);
        assert_eq!(spread(&[2.0, 1.0, 4.0]), 4.0);
    }

    #[test]
    fn missing_scenario_is_a_config_error() {
        assert!(matches!(run_scenario(&ExperimentConfig::default()), Err(LabError::Config(_))));
    }
}
