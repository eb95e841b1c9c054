use roughflow::stability::{choose_parameters, theorem_rhs, ParameterSchedule, ScheduleInputs, TheoremInputs};

use super::{flow, sup_superlevel, ChebyshevLog};
use crate::config::ExperimentConfig;
use crate::report::{Relation, ScenarioReport, Table};
use crate::{LabError, StageContext};

pub(super) fn theorem_bound(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.theorem_bound;
    let spec = c.grid.spec()?;
    let schedule = ParameterSchedule::from_epsilon(c.alpha, c.mu, c.epsilon, c.delta2).stage("schedule")?;
    let inputs = TheoremInputs { r: c.r, lambda: c.lambda, gamma: c.gamma, time_samples: c.time_samples };
    let b = c.field.build(c.time.horizon, None)?;
    let base = flow(report, "limit flow", &c.field, None, &c.grid, &c.time, c.time.step)?;

    let mut table = Table::new(&[
        "n", "lhs", "rhs_total", "term_difference", "term1", "term2", "term3", "term4", "term5", "sigma", "psi", "c_bound",
    ]);
    let mut cheb = ChebyshevLog::new();
    let mut worst = f64::NEG_INFINITY;
    let mut c_bound = 0.0f64;
    let mut reports = Vec::new();
    let scales: Vec<[f64; 2]> = std::iter::once([schedule.delta1(), schedule.delta2()]).chain(c.scales.iter().copied()).collect();
    for (i, &n) in c.ns.iter().enumerate() {
        let field_n = c.field.shifted(1.0 / n as f64);
        let b_n = field_n.build(c.time.horizon, None)?;
        let ens = flow(report, &format!("flow n={n}"), &field_n, None, &c.grid, &c.time, c.time.step)?;
        let lhs = sup_superlevel(&ens, &base, c.gamma, c.r)?;
        let rhs = report
            .timed(&format!("right-hand side n={n}"), || theorem_rhs(&b_n, &b, &schedule, &spec, &inputs, &ens, &base))
            .stage("right-hand side")?;
        worst = worst.max(lhs - rhs.total);
        c_bound = c_bound.max(rhs.c_bound);
        let t = rhs.terms;
        table.push(vec![
            n as f64, lhs, rhs.total, rhs.term_difference, t[0], t[1], t[2], t[3], t[4], rhs.sigma, rhs.psi, rhs.c_bound,
        ]);
        cheb.check(i, &ens, &base, c.gamma, c.r, &scales)?;
        reports.push(rhs);
    }
    report.tables.insert("theorem".into(), table);
    report.verdict("measured left side within the right side", "largest lhs - rhs", worst, Relation::AtMost(0.0));
    report.extra("schedule", schedule)?;
    report.extra("rhs", &reports)?;

    // the symbolic schedule for the measured bounded-term constant
    let choice = choose_parameters(ScheduleInputs {
        alpha: c.alpha,
        mu: c.mu,
        gamma: c.gamma,
        eta: c.eta,
        w_bound: c.w_bound,
        c_bound,
    })
    .stage("parameter choice")?;
    let largest = choice.terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.verdict("balanced schedule terms", "largest of terms 1-3", largest, Relation::AtMost(c.eta / 5.0 * (1.0 + 1e-9)));
    report.extra("parameter_choice", choice)?;
    cheb.finish(report);
    Ok(())
}
