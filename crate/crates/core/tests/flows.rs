//! Flow integration, compressibility and level-set measures against closed
//! forms.

use std::f64::consts::{E, FRAC_PI_2};

use roughflow::flow::{
    compressibility_constant, integrate_flow, integrate_ode, sublevel_mask, superlevel_measure, FlowEnsemble, Scheme,
};
use roughflow::space::{Extension, GridSpec, PartiallyRegularField, SpaceSplit};
use roughflow::Error;

fn plane(lo: f64, hi: f64, res: usize) -> GridSpec {
    GridSpec::cube(2, lo, hi, res, Extension::ZeroOutside).unwrap().with_split(SpaceSplit::planar()).unwrap()
}

fn linear(rate: f64) -> PartiallyRegularField {
    PartiallyRegularField::new(
        SpaceSplit::planar(),
        0.75,
        2.0,
        1.0,
        move |_, x1: &[f64], out: &mut [f64]| out[0] = rate * x1[0],
        |_, _, _, out: &mut [f64]| out[0] = 0.0,
    )
    .unwrap()
}

fn shear(offset: f64) -> PartiallyRegularField {
    PartiallyRegularField::new(
        SpaceSplit::planar(),
        0.75,
        2.0,
        1.0,
        |_, _, out: &mut [f64]| out[0] = 0.0,
        move |_, x1: &[f64], _, out: &mut [f64]| out[0] = x1[0].sin() + offset,
    )
    .unwrap()
}

#[test]
fn zero_field_leaves_particles_in_place() {
    let spec = plane(-1.0, 1.0, 9);
    let field = PartiallyRegularField::zero(SpaceSplit::planar(), 1.0).unwrap();
    let ens = integrate_flow(&field, &spec, &[0.0, 0.5, 1.0], Scheme::Rk4, 0.1).unwrap();
    for k in 0..3 {
        for i in 0..spec.len() {
            assert_eq!(ens.position(k, i), &spec.node(i)[..]);
        }
    }
}

#[test]
fn linear_field_matches_the_exponential() {
    let spec = GridSpec::new(vec![1.0, 0.0], vec![2.0, 1.0], vec![2, 2], Extension::ZeroOutside)
        .unwrap()
        .with_split(SpaceSplit::planar())
        .unwrap();
    let ens = integrate_flow(&linear(1.0), &spec, &[0.0, 1.0], Scheme::Rk4, 1e-3).unwrap();
    assert!((ens.position(1, 0)[0] - E).abs() <= 1e-9);
}

#[test]
fn shear_matches_its_closed_form() {
    let spec = GridSpec::new(vec![FRAC_PI_2, 0.0], vec![FRAC_PI_2 + 1.0, 1.0], vec![2, 2], Extension::ZeroOutside)
        .unwrap()
        .with_split(SpaceSplit::planar())
        .unwrap();
    let ens = integrate_flow(&shear(0.0), &spec, &[0.0, 1.0], Scheme::Rk4, 1e-2).unwrap();
    let x = ens.position(1, 0);
    assert!((x[0] - FRAC_PI_2).abs() <= 1e-15);
    assert!((x[1] - 1.0).abs() <= 1e-6);
}

#[test]
fn rk4_is_fourth_order() {
    // time-dependent right side so the error constant is not degenerate
    let f = |t: f64, x: &[f64], out: &mut [f64]| {
        out[0] = x[0] * t.cos();
        Ok(())
    };
    let exact = 1f64.sin().exp();
    let steps = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = steps
        .iter()
        .map(|h| (integrate_ode(&f, &[1.0], &[0.0, 1.0], Scheme::Rk4, *h).unwrap()[1][0] - exact).abs())
        .collect();
    let (slope, _) = roughflow::harmonic::linear_fit(
        &steps.iter().map(|h| h.ln()).collect::<Vec<_>>(),
        &errs.iter().map(|e| e.ln()).collect::<Vec<_>>(),
    );
    assert!((3.5..=4.5).contains(&slope), "{slope} from {errs:?}");
}

#[test]
fn compressibility_of_rest_and_shear_is_one() {
    let spec = plane(-1.0, 1.0, 41);
    let rest = integrate_flow(&PartiallyRegularField::zero(SpaceSplit::planar(), 1.0).unwrap(), &spec, &[0.0, 1.0], Scheme::Rk4, 0.5).unwrap();
    assert_eq!(compressibility_constant(&rest, &spec).unwrap(), 1.0);
    let probe = plane(-1.0, 1.0, 11);
    assert_eq!(compressibility_constant(&rest, &probe).unwrap(), 1.0);

    let sheared = integrate_flow(&shear(0.0), &spec, &[0.0, 0.5, 1.0], Scheme::Rk4, 0.01).unwrap();
    let l = compressibility_constant(&sheared, &probe).unwrap();
    assert!((1.0..=1.0 + 10.0 * probe.spacing(0)).contains(&l), "{l}");
}

#[test]
fn contraction_concentrates_by_e() {
    let spec = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 1.0], vec![2049, 3], Extension::ZeroOutside)
        .unwrap()
        .with_split(SpaceSplit::planar())
        .unwrap();
    let times: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
    let expanding = integrate_flow(&linear(1.0), &spec, &times, Scheme::Rk4, 1e-2).unwrap();
    let contracting = integrate_flow(&linear(-1.0), &spec, &times, Scheme::Rk4, 1e-2).unwrap();
    // probe 32x coarser in x1, same lattice in x2
    let probe = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 1.0], vec![65, 3], Extension::ZeroOutside).unwrap();
    let up = compressibility_constant(&expanding, &probe).unwrap();
    let down = compressibility_constant(&contracting, &probe).unwrap();
    assert!((up - 1.0).abs() < 0.05, "{up}");
    assert!((down - E).abs() < 0.1, "{down}");
}

#[test]
fn finer_probe_is_rejected() {
    let spec = plane(-1.0, 1.0, 11);
    let ens = integrate_flow(&shear(0.0), &spec, &[0.0, 1.0], Scheme::Rk4, 0.1).unwrap();
    assert!(matches!(compressibility_constant(&ens, &plane(-1.0, 1.0, 41)), Err(Error::InvalidGrid(_))));
}

#[test]
fn sublevel_masks_at_rest() {
    let spec = plane(-1.0, 1.0, 21);
    let rest = integrate_flow(&PartiallyRegularField::zero(SpaceSplit::planar(), 1.0).unwrap(), &spec, &[0.0, 1.0], Scheme::Euler, 0.5).unwrap();
    let all = sublevel_mask(&rest, 2.0).unwrap();
    assert!(all.mask.iter().all(|b| *b));
    assert_eq!(all.measure_outside(1.0), 0.0);

    let half = sublevel_mask(&rest, 0.5).unwrap();
    let annulus = spec.node_norms().iter().filter(|n| **n > 0.5 && **n <= 1.0).count();
    assert_eq!(half.measure_outside(1.0), annulus as f64 * spec.cell_volume());

    let sheared = integrate_flow(&shear(0.3), &spec, &[0.0, 0.5, 1.0], Scheme::Rk4, 0.05).unwrap();
    let mut last = f64::INFINITY;
    for lambda in [0.25, 0.5, 1.0, 1.5, 2.0, 4.0] {
        let m = sublevel_mask(&sheared, lambda).unwrap().measure_outside(1.0);
        assert!(m <= last);
        last = m;
    }
    assert_eq!(last, 0.0);
}

#[test]
fn superlevel_of_offset_shears() {
    let spec = plane(-1.0, 1.0, 21);
    let times = [0.0, 0.5, 1.0];
    let a = integrate_flow(&shear(0.0), &spec, &times, Scheme::Rk4, 0.01).unwrap();
    let b = integrate_flow(&shear(0.2), &spec, &times, Scheme::Rk4, 0.01).unwrap();
    assert!(superlevel_measure(&a, &a, 1e-12, 1.0, f64::INFINITY).unwrap().iter().all(|m| *m == 0.0));
    let ball = spec.node_norms().iter().filter(|n| **n <= 1.0).count() as f64 * spec.cell_volume();
    let below = superlevel_measure(&a, &b, 0.19, 1.0, f64::INFINITY).unwrap();
    let above = superlevel_measure(&a, &b, 0.21, 1.0, f64::INFINITY).unwrap();
    assert_eq!(below[2], ball);
    assert_eq!(above[2], 0.0);
    assert_eq!(below[0], 0.0);
}

#[test]
fn superlevel_is_monotone_in_gamma_and_radius() {
    let spec = plane(-1.0, 1.0, 15);
    let times = [0.0, 1.0];
    let a = integrate_flow(&linear(0.5), &spec, &times, Scheme::Rk4, 0.1).unwrap();
    let b = integrate_flow(&shear(0.1), &spec, &times, Scheme::Rk4, 0.1).unwrap();
    for k in 0..2 {
        let mut prev = f64::INFINITY;
        for gamma in [0.01, 0.05, 0.1, 0.3, 0.6] {
            let m = superlevel_measure(&a, &b, gamma, 1.0, 3.0).unwrap()[k];
            assert!(m <= prev);
            prev = m;
        }
        let mut prev = 0.0;
        for r in [0.2, 0.5, 1.0, 1.5] {
            let m = superlevel_measure(&a, &b, 0.05, r, 3.0).unwrap()[k];
            assert!(m >= prev);
            prev = m;
        }
    }
}

#[test]
fn mismatched_ensembles_are_rejected() {
    let a = integrate_flow(&shear(0.0), &plane(-1.0, 1.0, 5), &[0.0, 1.0], Scheme::Rk4, 0.1).unwrap();
    let b = integrate_flow(&shear(0.0), &plane(-1.0, 1.0, 7), &[0.0, 1.0], Scheme::Rk4, 0.1).unwrap();
    let c = integrate_flow(&shear(0.0), &plane(-1.0, 1.0, 5), &[0.0, 0.5], Scheme::Rk4, 0.1).unwrap();
    assert!(superlevel_measure(&a, &b, 0.1, 1.0, 2.0).is_err());
    assert!(superlevel_measure(&a, &c, 0.1, 1.0, 2.0).is_err());
}

#[test]
fn ensembles_round_trip_through_bytes() {
    let spec = plane(-1.0, 1.0, 6);
    let ens = integrate_flow(&shear(0.1), &spec, &[0.0, 0.5, 1.0], Scheme::Euler, 0.25).unwrap();
    let mut buf = Vec::new();
    ens.write_to(&mut buf).unwrap();
    assert_eq!(buf.len(), 8 * (6 + 3 + 3 * 36 * 2));
    let back = FlowEnsemble::read_from(&mut buf.as_slice(), &spec).unwrap();
    assert_eq!(back, ens);
    assert!(FlowEnsemble::read_from(&mut buf.as_slice(), &plane(-1.0, 2.0, 6)).is_err());
}

#[test]
fn integration_is_bit_identical_across_thread_counts() {
    let spec = plane(-1.0, 1.0, 17);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| integrate_flow(&shear(0.1), &spec, &[0.0, 1.0], Scheme::Rk4, 0.01).unwrap())
    };
    assert_eq!(run(1), run(3));
}
