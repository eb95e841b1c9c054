use roughflow::flow::{compressibility_constant, domain_mask, superlevel_measure};
use roughflow::harmonic::lp_norm;
use roughflow::reduce::trapezoid;
use roughflow::space::{divergence_on_grid, sample_field, GridSpec};

use super::{flow, fractional_norm, max_increase, spread, sup_superlevel, ChebyshevLog};
use crate::config::{ExperimentConfig, GridConfig, TimeConfig};
use crate::fields::FieldSpec;
use crate::report::{Relation, ScenarioReport, Table};
use crate::{LabError, StageContext};

/// Largest allowed max/min of the fractional norms along a sequence.
const EQUIBOUND_SPREAD: f64 = 2.0;

pub(super) fn uniqueness(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.uniqueness;
    let eps = Some(c.epsilon);
    let h = c.time.step;
    let coarse = flow(report, "coarse flow", &c.field, eps, &c.grid, &c.time, h)?;
    let fine = flow(report, "fine flow", &c.field, eps, &c.grid, &c.time, h / c.refinement as f64)?;
    let reference = flow(report, "reference flow", &c.field, eps, &c.grid, &c.time, h / c.reference_refinement as f64)?;

    let a = superlevel_measure(&coarse, &reference, c.gamma, c.r, f64::INFINITY).stage("superlevel")?;
    let b = superlevel_measure(&fine, &reference, c.gamma, c.r, f64::INFINITY).stage("superlevel")?;
    let d = superlevel_measure(&coarse, &fine, c.gamma, c.r, f64::INFINITY).stage("superlevel")?;
    let mut table = Table::new(&["time", "coarse_vs_reference", "fine_vs_reference", "coarse_vs_fine"]);
    for (k, &t) in coarse.times().iter().enumerate() {
        table.push(vec![t, a[k], b[k], d[k]]);
    }
    report.tables.insert("superlevel".into(), table);
    let sup_a = a.iter().copied().fold(0.0, f64::max);
    let sup_b = b.iter().copied().fold(0.0, f64::max);
    // 0/0: both flows already agree with the reference
    let ratio = if sup_b == 0.0 { 0.0 } else { sup_b / sup_a };
    report.verdict("refinement shrinks the superlevel set", "fine/coarse superlevel", ratio, Relation::AtMost(1.0 / c.min_shrink));
    report.extra("coarse_superlevel", sup_a)?;
    report.extra("fine_superlevel", sup_b)?;

    let mut cheb = ChebyshevLog::new();
    cheb.check(0, &coarse, &reference, c.gamma, c.r, &c.scales)?;
    cheb.check(1, &fine, &reference, c.gamma, c.r, &c.scales)?;
    cheb.check(2, &coarse, &fine, c.gamma, c.r, &c.scales)?;
    cheb.finish(report);
    Ok(())
}

/// `||b - bbar||_{L^1((0,T) x B_r)}` by trapezoid in time on the grid nodes.
fn l1_distance(b: &FieldSpec, bbar: &FieldSpec, grid: &GridConfig, time: &TimeConfig, r: f64) -> Result<f64, LabError> {
    let spec = grid.spec()?;
    let (f, g) = (b.build(time.horizon, None)?, bbar.build(time.horizon, None)?);
    let mask = spec.ball_mask(r);
    let times = time.times();
    let samples = times
        .iter()
        .map(|&t| {
            let (u, v) = (sample_field(&f, &spec, t)?, sample_field(&g, &spec, t)?);
            let n = u.components();
            let diff: Vec<f64> = u
                .values()
                .chunks_exact(n)
                .zip(v.values().chunks_exact(n))
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
                .collect();
            lp_norm(&spec, &diff, 1.0, Some(&mask))
        })
        .collect::<roughflow::Result<Vec<f64>>>()?;
    Ok(trapezoid(&samples, time.horizon / time.outputs as f64))
}

pub(super) fn stability(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.stability;
    let base = flow(report, "limit flow", &c.field, None, &c.grid, &c.time, c.time.step)?;
    let ball = domain_mask(&base, &base, c.r, f64::INFINITY).stage("domain")?;
    let ball_measure = ball.iter().filter(|b| **b).count() as f64 * base.spec().cell_volume();
    let horizon = c.time.horizon;
    let s = c.field.alpha();

    let mut table = Table::new(&["n", "superlevel", "predicted", "l1_difference", "fractional_norm"]);
    let mut cheb = ChebyshevLog::new();
    let mut measures = Vec::new();
    let mut norms = vec![fractional_norm(&c.field, horizon, s, c.r, c.seminorm_resolution)?];
    let mut closed_form_error = 0.0f64;
    let mut beyond_cutoff = 0.0f64;
    for (i, &n) in c.ns.iter().enumerate() {
        let offset = 1.0 / n as f64;
        let field_n = c.field.shifted(offset);
        let ens = flow(report, &format!("flow n={n}"), &field_n, None, &c.grid, &c.time, c.time.step)?;
        let m = sup_superlevel(&ens, &base, c.gamma, c.r)?;
        // the offset moves x2 by t/n and leaves x1 alone
        let predicted = if horizon * offset > c.gamma { ball_measure } else { 0.0 };
        closed_form_error = closed_form_error.max((m - predicted).abs());
        if n as f64 > horizon / c.gamma {
            beyond_cutoff = beyond_cutoff.max(m);
        }
        let norm = fractional_norm(&field_n, horizon, s, c.r, c.seminorm_resolution)?;
        let dist = l1_distance(&field_n, &c.field, &c.grid, &c.time, c.r)?;
        table.push(vec![n as f64, m, predicted, dist, norm]);
        measures.push(m);
        norms.push(norm);
        cheb.check(i, &ens, &base, c.gamma, c.r, &c.scales)?;
    }
    report.series("superlevel", "n", c.ns.iter().zip(&measures).map(|(&n, &m)| (n as f64, m)).collect());
    report.tables.insert("stability".into(), table);
    report.verdict("superlevel nonincreasing in n", "largest increase", max_increase(&measures), Relation::AtMost(0.0));
    report.verdict("superlevel vanishes beyond T/gamma", "largest superlevel for n > T/gamma", beyond_cutoff, Relation::AtMost(0.0));
    report.verdict("closed-form shear displacement", "largest |measured - predicted|", closed_form_error, Relation::AtMost(1e-12));
    report.verdict("equi-bounded fractional norms", "max/min norm", spread(&norms), Relation::AtMost(EQUIBOUND_SPREAD));
    cheb.finish(report);
    Ok(())
}

pub(super) fn compactness(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.compactness;
    let fields: Vec<FieldSpec> = c.term_counts.iter().map(|&terms| FieldSpec::Weierstrass { alpha: c.alpha, terms }).collect();
    let flows = fields
        .iter()
        .zip(&c.term_counts)
        .map(|(f, k)| flow(report, &format!("flow terms={k}"), f, None, &c.grid, &c.time, c.time.step))
        .collect::<Result<Vec<_>, _>>()?;

    let mut pairwise = Table::new(&["terms_i", "terms_j", "superlevel"]);
    let mut rows = Table::new(&["terms", "tail_sup", "fractional_norm"]);
    let mut tails = Vec::new();
    let mut norms = Vec::new();
    let mut cheb = ChebyshevLog::new();
    for i in 0..flows.len() {
        let mut tail = 0.0f64;
        for j in 0..flows.len() {
            let m = if i == j { 0.0 } else { sup_superlevel(&flows[i], &flows[j], c.gamma, c.r)? };
            pairwise.push(vec![c.term_counts[i] as f64, c.term_counts[j] as f64, m]);
            if j > i {
                tail = tail.max(m);
            }
        }
        if i + 1 < flows.len() {
            cheb.check(i, &flows[i], &flows[i + 1], c.gamma, c.r, &c.scales)?;
            tails.push(tail);
        }
        let norm = fractional_norm(&fields[i], c.time.horizon, c.alpha, c.r, 801)?;
        norms.push(norm);
        rows.push(vec![c.term_counts[i] as f64, tail, norm]);
    }
    report.tables.insert("pairwise".into(), pairwise);
    report.tables.insert("rows".into(), rows);
    report.series("tail_sup", "terms", c.term_counts.iter().zip(&tails).map(|(&k, &m)| (k as f64, m)).collect());
    report.verdict("tail suprema nonincreasing", "largest increase", max_increase(&tails), Relation::AtMost(0.0));
    report.verdict("Cauchy in measure", "last tail supremum", tails.last().copied().unwrap_or(0.0), Relation::AtMost(0.0));
    report.verdict("equi-bounded fractional norms", "max/min norm", spread(&norms), Relation::AtMost(EQUIBOUND_SPREAD));
    cheb.finish(report);
    Ok(())
}

pub(super) fn existence(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.existence;
    let spec = c.grid.spec()?;
    let probe_res = c.grid.resolution.map(|n| (n - 1) / c.probe_factor + 1);
    let probe = GridSpec::new(c.grid.lower.to_vec(), c.grid.upper.to_vec(), probe_res.to_vec(), spec.extension())?;
    let mut table = Table::new(&["epsilon", "compressibility", "divergence_sup", "bound", "cauchy_superlevel"]);
    let mut cheb = ChebyshevLog::new();
    let mut excess = f64::NEG_INFINITY;
    let mut cauchy = Vec::new();
    let mut previous = None;
    for (i, &eps) in c.epsilons.iter().enumerate() {
        let ens = flow(report, &format!("flow eps={eps}"), &c.field, Some(eps), &c.grid, &c.time, c.time.step)?;
        let l = compressibility_constant(&ens, &probe).stage("compressibility")?;
        let b = c.field.build(c.time.horizon, Some(eps))?;
        let mut div = 0.0f64;
        for &t in &c.time.times() {
            let d = divergence_on_grid(&b, &spec, t).stage("divergence")?;
            div = div.max(d.values().iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        // a probe cell m initial cells wide can gain one partial column per axis
        let bound = (c.time.horizon * div).exp() + 1.0 / c.probe_factor as f64;
        excess = excess.max(l - bound);
        let m = match &previous {
            Some(prev) => {
                cheb.check(i, prev, &ens, c.gamma, c.r, &c.scales)?;
                sup_superlevel(prev, &ens, c.gamma, c.r)?
            }
            None => f64::NAN,
        };
        if m.is_finite() {
            cauchy.push(m);
        }
        table.push(vec![eps, l, div, bound, m]);
        previous = Some(ens);
    }
    report.tables.insert("existence".into(), table);
    report.verdict("compressibility within the divergence bound", "largest L - bound", excess, Relation::AtMost(0.0));
    let trend = match (cauchy.first(), cauchy.last()) {
        (Some(first), Some(last)) => last - first,
        _ => 0.0,
    };
    report.verdict("consecutive flows approach each other", "last - first consecutive superlevel", trend, Relation::AtMost(0.0));
    cheb.finish(report);
    Ok(())
}
