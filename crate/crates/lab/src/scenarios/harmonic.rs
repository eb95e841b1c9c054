use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughflow::harmonic::{
    difference_quotient_check, fractional_seminorm, interpolation_bound, lp_norm, maximal_function, rate_fit, u_bound_check,
    weak_l1, AnisotropicScale,
};
use roughflow::space::{Extension, GridFunction, GridSpec, SpaceSplit};

use super::spread;
use crate::config::ExperimentConfig;
use crate::report::{Relation, ScenarioReport, Table};
use crate::{LabError, StageContext};

pub(super) fn rates(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.rates;
    let spec = GridSpec::periodic(vec![0.0], vec![2.0 * PI], vec![c.resolution])?;
    let rough = c.profile.evaluator(None)?;
    let f = GridFunction::from_fn(spec.clone(), |x| rough.eval(x[0]))?;
    let fit = report.timed("rate fit", || rate_fit(&f, c.s, c.p, &c.epsilons)).stage("rate fit")?;

    let mut table = Table::new(&["epsilon", "conv_norm", "blowup_norm"]);
    for s in &fit.samples {
        table.push(vec![s.epsilon, s.conv_norm, s.blowup_norm]);
    }
    report.tables.insert("rates".into(), table);
    report.series("conv_norm", "epsilon", fit.samples.iter().map(|s| (s.epsilon, s.conv_norm)).collect());
    report.series("blowup_norm", "epsilon", fit.samples.iter().map(|s| (s.epsilon, s.blowup_norm)).collect());
    report.verdict("convergence slope", "fit_conv", fit.fit_conv, Relation::Within(c.conv_band[0], c.conv_band[1]));
    report.verdict("blow-up slope", "fit_blowup", fit.fit_blowup, Relation::Within(c.blowup_band[0], c.blowup_band[1]));
    report.verdict("convergence fit quality", "r2_conv", fit.r2_conv, Relation::AtLeast(c.min_r2));
    report.verdict("blow-up fit quality", "r2_blowup", fit.r2_blowup, Relation::AtLeast(c.min_r2));

    let smooth = c.smooth_profile.evaluator(None)?;
    let g = GridFunction::from_fn(spec, |x| smooth.eval(x[0]))?;
    let smooth_fit = report.timed("smooth rate fit", || rate_fit(&g, 1.0, c.p, &c.epsilons)).stage("smooth rate fit")?;
    report.verdict("smooth profile converges at least linearly", "fit_conv", smooth_fit.fit_conv, Relation::AtLeast(1.0));
    report.extra("fit", &fit)?;
    report.extra("smooth_fit", &smooth_fit)?;
    Ok(())
}

/// Sum of Gaussian bumps with seeded heights, centres and widths.
fn random_bumps(rng: &mut ChaCha8Rng, count: usize) -> Vec<[f64; 3]> {
    (0..count).map(|_| [rng.gen_range(0.2..1.0), rng.gen_range(0.2..0.8), rng.gen_range(0.02..0.2)]).collect()
}

fn eval_bumps(bumps: &[[f64; 3]], x: f64) -> f64 {
    bumps.iter().map(|[a, c, w]| a * (-((x - c) / w).powi(2)).exp()).sum()
}

pub(super) fn maximal(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.maximal;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let corpus: Vec<_> = (0..c.functions).map(|_| random_bumps(&mut rng, c.bumps)).collect();
    let mut table = Table::new(&["function", "resolution", "strong_ratio", "weak_ratio"]);
    let mut strong = Vec::new();
    let mut weak = Vec::new();
    for &res in &c.resolutions {
        let spec = GridSpec::new(vec![0.0], vec![1.0], vec![res], Extension::ZeroOutside)?;
        report.timed(&format!("maximal {res}"), || -> Result<(), LabError> {
            for (i, bumps) in corpus.iter().enumerate() {
                let u = GridFunction::from_fn(spec.clone(), |x| eval_bumps(bumps, x[0]))?;
                let mu = maximal_function(&u).stage("maximal function")?;
                let s = lp_norm(&spec, mu.values(), 2.0, None)? / lp_norm(&spec, u.values(), 2.0, None)?;
                let w = weak_l1(&spec, mu.values(), None)? / lp_norm(&spec, u.values(), 1.0, None)?;
                table.push(vec![i as f64, res as f64, s, w]);
                strong.push(s);
                weak.push(w);
            }
            Ok(())
        })?;
    }
    report.tables.insert("maximal".into(), table);
    report.verdict("strong ratio band across corpus and resolutions", "max/min of |Mu|_2/|u|_2", spread(&strong), Relation::AtMost(c.band_ratio));
    report.verdict("strong bound holds", "min of |Mu|_2/|u|_2", strong.iter().copied().fold(f64::INFINITY, f64::min), Relation::AtLeast(1.0));
    report.verdict("weak constant stable across corpus", "max/min of |||Mu|||/|u|_1", spread(&weak), Relation::AtMost(c.weak_ratio));
    Ok(())
}

/// `sum_j a_j sin(2 pi (k_j . x) + phase_j)` with small integer wave vectors.
fn random_trig(rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    (0..4)
        .map(|_| {
            [rng.gen_range(0.2..1.0), rng.gen_range(0..=3) as f64, rng.gen_range(0..=3) as f64, rng.gen_range(0.0..2.0 * PI)]
        })
        .collect()
}

fn eval_trig(modes: &[[f64; 4]], x: &[f64]) -> f64 {
    modes.iter().map(|[a, k1, k2, ph]| a * (2.0 * PI * (k1 * x[0] + k2 * x[1]) + ph).sin()).sum()
}

pub(super) fn lemma_checks(config: &ExperimentConfig, report: &mut ScenarioReport) -> Result<(), LabError> {
    let c = &config.lemma_checks;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // difference quotients against the maximal function of the gradient
    let square = GridSpec::cube(2, 0.0, 1.0, c.quotient_resolution, Extension::ZeroOutside)?;
    let mut table = Table::new(&["function", "pairs", "max_ratio", "violations"]);
    let mut violations = 0;
    for i in 0..c.quotient_functions {
        let modes = random_trig(&mut rng);
        let f = GridFunction::from_fn(square.clone(), |x| eval_trig(&modes, x))?;
        let seed = rng.gen();
        let q = report
            .timed("difference quotients", || difference_quotient_check(&f, c.pairs, seed, c.constant))
            .stage("difference quotients")?;
        violations += q.violations_at_c;
        table.push(vec![i as f64, q.pairs as f64, q.max_ratio, q.violations_at_c as f64]);
    }
    report.tables.insert("quotient".into(), table);
    report.verdict("difference quotient bound", "violations_at_c", violations as f64, Relation::AtMost(0.0));

    // interpolation between weak L^1 and L^p
    let line = GridSpec::new(vec![0.0], vec![1.0], vec![c.interpolation_resolution], Extension::ZeroOutside)?;
    let mut table = Table::new(&["draw", "p", "lhs", "rhs"]);
    let mut violations = 0;
    for i in 0..c.interpolation_draws {
        let power = rng.gen_range(1.0..8.0);
        let sparsity: f64 = rng.gen_range(0.0..0.9);
        let values: Vec<f64> =
            (0..line.len()).map(|_| if rng.gen_bool(sparsity) { 0.0 } else { rng.gen_range(0.0f64..1.0).powf(power) }).collect();
        let u = GridFunction::scalar(line.clone(), values)?;
        for p in [2.0, f64::INFINITY] {
            let r = interpolation_bound(&u, p, None).stage("interpolation")?;
            if r.lhs > r.rhs * (1.0 + 1e-12) {
                violations += 1;
            }
            table.push(vec![i as f64, p, r.lhs, r.rhs]);
        }
    }
    report.tables.insert("interpolation".into(), table);
    report.verdict("interpolation bound", "violations", violations as f64, Relation::AtMost(0.0));

    // weak bound on U: the empirical constant should not depend on the scaling
    let plane = GridSpec::cube(2, 0.0, 1.0, c.u_resolution, Extension::ZeroOutside)?.with_split(SpaceSplit::planar())?;
    let f = GridFunction::from_fn(plane, |x| (-((x[0] - 0.5).powi(2) + (x[1] - 0.4).powi(2)) / 0.02).exp())?;
    let mut table = Table::new(&["delta1", "delta2", "weak_ratio", "strong_ratio"]);
    let mut ratios = Vec::new();
    for &d1 in &c.u_deltas {
        let scale = AnisotropicScale::new(d1, 1.0, SpaceSplit::planar()).stage("U bound")?;
        let r = report.timed("U bound", || u_bound_check(&f, &scale, 2.0)).stage("U bound")?;
        ratios.push(r.weak_ratio());
        table.push(vec![d1, 1.0, r.weak_ratio(), r.strong_ratio()]);
    }
    report.tables.insert("u_bound".into(), table);
    report.verdict("U weak constant stable across scalings", "max/min weak_ratio", spread(&ratios), Relation::AtMost(c.u_ratio));

    // indicator of [0, 1] on a truncated box, against its closed form
    let box_line = GridSpec::new(vec![-2.0], vec![3.0], vec![c.seminorm_resolution], Extension::ZeroOutside)?;
    let ind = GridFunction::from_fn(box_line, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 })?;
    let est = fractional_seminorm(&ind, 0.5, 1.0).stage("seminorm")?;
    let oracle = 16.0 - 16.0 * (3f64.sqrt() - 2f64.sqrt());
    report.verdict("indicator seminorm", "relative error", (est.integral - oracle).abs() / oracle, Relation::AtMost(c.seminorm_tolerance));
    report.extra("seminorm", est)?;
    Ok(())
}
