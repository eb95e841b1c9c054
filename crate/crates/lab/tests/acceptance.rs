//! The nine acceptance criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use roughflow::flow::{integrate_flow, Scheme};
use roughflow::harmonic::linear_fit;
use roughflow::space::{Extension, GridSpec, PartiallyRegularField, SpaceSplit};
use roughflow::stability::{choose_parameters, ScheduleInputs};
use roughflow::Error;
use roughflow_lab::config::ExperimentConfig;
use roughflow_lab::fields::FieldSpec;
use roughflow_lab::scenarios::{for_scenario, CHEBYSHEV_SLACK};
use roughflow_lab::{run_scenario, ScenarioKind, ScenarioReport};

const RATES_SINGLE_THREAD_BUDGET: Duration = Duration::from_secs(30);
const SUITE_BUDGET: Duration = Duration::from_secs(600);
const LINEAR_TOL: f64 = 1e-9;
const SHEAR_TOL: f64 = 1e-6;
const ORDER_BAND: (f64, f64) = (3.5, 4.5);
const SCHEDULE_SLACK: f64 = 1e-9;

struct Outcome {
    lines: Vec<String>,
    failed: usize,
}

impl Outcome {
    fn record(&mut self, n: usize, passed: bool, detail: String) {
        let line = format!("criterion {n}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        self.failed += usize::from(!passed);
    }
}

fn verdict(report: &ScenarioReport, check: &str) -> (bool, f64) {
    let v = report.find(check).unwrap_or_else(|| panic!("{} has no verdict {check:?}", report.scenario.name()));
    (v.passed, v.value)
}

fn pin_tolerances(c: &ExperimentConfig) {
    assert_eq!(c.rates.profile, roughflow_lab::fields::Profile::weierstrass(0.6, 12));
    assert_eq!(c.rates.resolution, 1 << 14);
    assert_eq!(c.rates.epsilons, (3..=7).map(|k| 2f64.powi(-k)).collect::<Vec<_>>());
    assert_eq!((c.rates.conv_band, c.rates.blowup_band, c.rates.min_r2), ([0.5, 0.7], [-0.5, -0.3], 0.98));
    assert_eq!((c.maximal.functions, c.maximal.resolutions.clone()), (20, vec![512, 1024]));
    assert_eq!((c.maximal.band_ratio, c.maximal.weak_ratio), (2.0, 2.0));
    let l = &c.lemma_checks;
    assert_eq!((l.quotient_resolution, l.pairs, l.constant, l.interpolation_draws), (128, 10_000, 4.0, 100));
    assert_eq!((c.uniqueness.gamma, c.uniqueness.refinement, c.uniqueness.min_shrink), (0.1, 4, 4.0));
    assert_eq!((c.stability.ns.clone(), c.stability.time.horizon, c.stability.gamma), (vec![2, 4, 8, 16, 32], 1.0, 0.05));
    assert_eq!((c.theorem_bound.ns.clone(), c.theorem_bound.gamma), (vec![2, 4, 8, 16, 32], 0.05));
    assert_eq!(CHEBYSHEV_SLACK, 1e-12);
}

fn linear_error(h: f64) -> f64 {
    let spec = GridSpec::cube(2, -1.0, 1.0, 5, Extension::ZeroOutside).unwrap().with_split(SpaceSplit::planar()).unwrap();
    let b = FieldSpec::Linear { rate: 1.0 }.build(1.0, None).unwrap();
    let ens = integrate_flow(&b, &spec, &[0.0, 1.0], Scheme::Rk4, h).unwrap();
    let e = std::f64::consts::E;
    (0..ens.particles())
        .map(|i| {
            let x0 = spec.node(i);
            let x = ens.position(1, i);
            (x[0] - x0[0] * e).abs().max((x[1] - x0[1]).abs())
        })
        .fold(0.0, f64::max)
}

fn shear_error() -> f64 {
    let spec = GridSpec::cube(2, -1.0, 1.0, 33, Extension::ZeroOutside).unwrap().with_split(SpaceSplit::planar()).unwrap();
    let field = FieldSpec::Weierstrass { alpha: 0.75, terms: 12 };
    let b: PartiallyRegularField = field.build(1.0, None).unwrap();
    let times = [0.0, 0.25, 0.5, 0.75, 1.0];
    let ens = integrate_flow(&b, &spec, &times, Scheme::Rk4, 1e-2).unwrap();
    let mut worst = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        for i in 0..ens.particles() {
            let x0 = spec.node(i);
            let v = b.eval(0.0, &x0).unwrap();
            let x = ens.position(k, i);
            worst = worst.max((x[0] - x0[0]).abs()).max((x[1] - (x0[1] + t * v[1])).abs());
        }
    }
    worst
}

fn main() {
    let base = ExperimentConfig::default();
    pin_tolerances(&base);
    let mut out = Outcome { lines: Vec::new(), failed: 0 };
    let suite_start = Instant::now();

    // 1: rates, single thread
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let rates = single.install(|| run_scenario(&for_scenario(&base, ScenarioKind::Rates))).unwrap();
    let elapsed = start.elapsed();
    let checks = ["convergence slope", "blow-up slope", "convergence fit quality", "blow-up fit quality"];
    let values: Vec<(bool, f64)> = checks.iter().map(|c| verdict(&rates, c)).collect();
    out.record(
        1,
        values.iter().all(|v| v.0) && elapsed < RATES_SINGLE_THREAD_BUDGET,
        format!(
            "fit_conv={:.4} fit_blowup={:.4} r2=({:.5}, {:.5}) in {:.2}s single-thread",
            values[0].1,
            values[1].1,
            values[2].1,
            values[3].1,
            elapsed.as_secs_f64()
        ),
    );

    let run = |kind| run_scenario(&for_scenario(&base, kind)).unwrap();
    let maximal = run(ScenarioKind::Maximal);
    let lemmas = run(ScenarioKind::LemmaChecks);
    let uniqueness = run(ScenarioKind::Uniqueness);
    let stability = run(ScenarioKind::Stability);
    let compactness = run(ScenarioKind::Compactness);
    let theorem = run(ScenarioKind::TheoremBound);
    let existence = run(ScenarioKind::Existence);
    let suite_elapsed = suite_start.elapsed();

    // 2: maximal function, strong band and weak constant
    let (band_ok, band) = verdict(&maximal, "strong ratio band across corpus and resolutions");
    let (weak_ok, weak) = verdict(&maximal, "weak constant stable across corpus");
    out.record(2, band_ok && weak_ok, format!("strong band max/min={band:.4} weak C max/min={weak:.4} (limit 2)"));

    // 3: difference quotients
    let (ok, v) = verdict(&lemmas, "difference quotient bound");
    out.record(3, ok, format!("violations_at_C={v} over 10^4 pairs per function, C=4"));

    // 4: interpolation
    let (ok, v) = verdict(&lemmas, "interpolation bound");
    out.record(4, ok, format!("violations={v} over 100 draws at p=2 and p=inf"));

    // 5: integrator
    let lin = linear_error(1e-3);
    let hs: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
    let (lx, ly): (Vec<f64>, Vec<f64>) = hs.iter().map(|&h| (h.ln(), linear_error(h).ln())).unzip();
    let (order, _) = linear_fit(&lx, &ly);
    let shear = shear_error();
    out.record(
        5,
        lin <= LINEAR_TOL && (ORDER_BAND.0..=ORDER_BAND.1).contains(&order) && shear <= SHEAR_TOL,
        format!("linear error={lin:.3e} order={order:.3} shear error={shear:.3e}"),
    );

    // 6: Chebyshev across the suite
    let flow_reports = [&uniqueness, &stability, &compactness, &theorem, &existence];
    let violations: f64 = flow_reports.iter().map(|r| verdict(r, "chebyshev").1).sum();
    let points: usize = flow_reports.iter().map(|r| r.tables["chebyshev"].rows.len()).sum();
    out.record(6, violations == 0.0, format!("violations={violations} over {points} (scale, time) points"));

    // 7: parameter schedule
    let measured_c = theorem.extras["parameter_choice"]["inputs"]["c_bound"].as_f64().unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut all_ok = true;
    for alpha in [0.55, 0.65, 0.75, 0.85, 0.95] {
        for c_bound in [0.01, measured_c] {
            let inputs = ScheduleInputs { alpha, mu: 0.05, gamma: 0.1, eta: 0.1, w_bound: 1.0, c_bound };
            match choose_parameters(inputs) {
                Ok(choice) => {
                    let m = choice.terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    worst = worst.max(m);
                    all_ok &= m <= 0.1 / 5.0 * (1.0 + SCHEDULE_SLACK);
                }
                Err(_) => all_ok = false,
            }
        }
    }
    let half = matches!(
        choose_parameters(ScheduleInputs { alpha: 0.5, mu: 0.05, gamma: 0.1, eta: 0.1, w_bound: 1.0, c_bound: 0.01 }),
        Err(Error::InfeasibleExponent { .. })
    );
    out.record(7, all_ok && half, format!("largest term={worst:.6e} (limit 0.02), alpha=0.5 infeasible: {half}"));

    // 8: stability and the measured estimate
    let (mono_ok, inc) = verdict(&stability, "superlevel nonincreasing in n");
    let (cut_ok, tail) = verdict(&stability, "superlevel vanishes beyond T/gamma");
    let (lhs_ok, gap) = verdict(&theorem, "measured left side within the right side");
    out.record(
        8,
        mono_ok && cut_ok && lhs_ok,
        format!("largest increase={inc} superlevel for n>20={tail} largest lhs-rhs={gap:.4}"),
    );

    // 9: uniqueness proxy and the suite budget
    let (ok, ratio) = verdict(&uniqueness, "refinement shrinks the superlevel set");
    let coarse = uniqueness.extras["coarse_superlevel"].as_f64().unwrap();
    out.record(
        9,
        ok && suite_elapsed < SUITE_BUDGET,
        format!("coarse superlevel={coarse:.5} fine/coarse={ratio:.4} (limit 0.25) suite {:.1}s", suite_elapsed.as_secs_f64()),
    );

    if out.failed > 0 {
        eprintln!("{} of 9 criteria failed:\n{}", out.failed, out.lines.join("\n"));
        std::process::exit(1);
    }
}
