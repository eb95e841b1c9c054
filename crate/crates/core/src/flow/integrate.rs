use rayon::prelude::*;

use super::FlowEnsemble;
use crate::error::{Error, Result};
use crate::space::{GridSpec, PartiallyRegularField};

/// Fixed-step explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
    Euler,
}

impl Scheme {
    pub(crate) fn tag(self) -> u64 {
        match self {
            Scheme::Rk4 => 0,
            Scheme::Euler => 1,
        }
    }

    pub(crate) fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Scheme::Rk4),
            1 => Some(Scheme::Euler),
            _ => None,
        }
    }
}

/// Steps per gap between consecutive output times; each gap must be a whole
/// number of steps of size `h_t`, up to rounding.
pub(crate) fn steps_per_gap(times: &[f64], h_t: f64) -> Result<Vec<usize>> {
    if !(h_t > 0.0 && h_t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step {h_t} must be positive")));
    }
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::InvalidArgument("output times must start at 0".into()));
    }
    times
        .windows(2)
        .map(|w| {
            let gap = w[1] - w[0];
            if !(gap > 0.0) {
                return Err(Error::InvalidArgument(format!("output times {} and {} are not increasing", w[0], w[1])));
            }
            let n = (gap / h_t).round();
            if n < 1.0 || (n * h_t - gap).abs() > 1e-9 * gap.max(1.0) {
                return Err(Error::InvalidArgument(format!("time step {h_t} does not divide the gap {gap}")));
            }
            Ok(n as usize)
        })
        .collect()
}

/// Scratch space for one explicit step in dimension `n`.
pub(crate) struct Stepper {
    k: [Vec<f64>; 4],
    y: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(n: usize) -> Self {
        Stepper { k: std::array::from_fn(|_| vec![0.0; n]), y: vec![0.0; n] }
    }

    /// Advances `x` from `t` by `h`; stage times are clamped to `t_max`.
    pub(crate) fn step<F>(&mut self, f: &F, scheme: Scheme, t: f64, h: f64, t_max: f64, x: &mut [f64]) -> Result<()>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + ?Sized,
    {
        match scheme {
            Scheme::Euler => {
                f(t, x, &mut self.k[0])?;
                for (xi, ki) in x.iter_mut().zip(&self.k[0]) {
                    *xi += h * ki;
                }
            }
            Scheme::Rk4 => {
                let half = (t + 0.5 * h).min(t_max);
                let end = (t + h).min(t_max);
                let [k1, k2, k3, k4] = &mut self.k;
                let y = &mut self.y;
                f(t, x, k1)?;
                for i in 0..x.len() {
                    y[i] = x[i] + 0.5 * h * k1[i];
                }
                f(half, y, k2)?;
                for i in 0..x.len() {
                    y[i] = x[i] + 0.5 * h * k2[i];
                }
                f(half, y, k3)?;
                for i in 0..x.len() {
                    y[i] = x[i] + h * k3[i];
                }
                f(end, y, k4)?;
                for i in 0..x.len() {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        Ok(())
    }
}

/// Integrates `dx/ds = f(s, x)` from `x0` and records the state at each of
/// `times` (the first being `0`). Used for single trajectories and
/// convergence studies.
pub fn integrate_ode<F>(f: &F, x0: &[f64], times: &[f64], scheme: Scheme, h_t: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + ?Sized,
{
    let steps = steps_per_gap(times, h_t)?;
    let t_max = *times.last().expect("times is nonempty");
    let mut stepper = Stepper::new(x0.len());
    let mut x = x0.to_vec();
    let mut out = vec![x.clone()];
    for (gap, &n) in steps.iter().enumerate() {
        let (t0, t1) = (times[gap], times[gap + 1]);
        let h = (t1 - t0) / n as f64;
        for j in 0..n {
            let t = t0 + j as f64 * h;
            stepper.step(f, scheme, t, h, t_max, &mut x)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { particle: 0, t: t + h });
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Flow of `field` from every node of `spec`, recorded at `times`.
pub fn integrate_flow(field: &PartiallyRegularField, spec: &GridSpec, times: &[f64], scheme: Scheme, h_t: f64) -> Result<FlowEnsemble> {
    let n = field.dim();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.dim() });
    }
    let steps = steps_per_gap(times, h_t)?;
    let t_max = *times.last().expect("times is nonempty");
    if t_max > field.horizon() {
        return Err(Error::TimeOutOfRange { t: t_max, horizon: field.horizon() });
    }
    let rhs = |t: f64, x: &[f64], out: &mut [f64]| field.eval_into(t, x, out);
    let particles = spec.len();
    // per particle: its positions at every recorded time
    let tracks: Vec<Vec<f64>> = (0..particles)
        .into_par_iter()
        .map_init(
            || Stepper::new(n),
            |stepper, i| {
                let mut x = spec.node(i);
                let mut track = Vec::with_capacity(times.len() * n);
                track.extend_from_slice(&x);
                for (gap, &m) in steps.iter().enumerate() {
                    let (t0, t1) = (times[gap], times[gap + 1]);
                    let h = (t1 - t0) / m as f64;
                    for j in 0..m {
                        let t = t0 + j as f64 * h;
                        stepper.step(&rhs, scheme, t, h, t_max, &mut x).map_err(|e| match e {
                            Error::NonFiniteField { .. } => Error::BlowUp { particle: i, t },
                            other => other,
                        })?;
                        if x.iter().any(|v| !v.is_finite()) {
                            return Err(Error::BlowUp { particle: i, t: t + h });
                        }
                    }
                    track.extend_from_slice(&x);
                }
                Ok(track)
            },
        )
        .collect::<Result<_>>()?;
    let mut positions = vec![0.0; times.len() * particles * n];
    for (i, track) in tracks.iter().enumerate() {
        for k in 0..times.len() {
            let dst = (k * particles + i) * n;
            positions[dst..dst + n].copy_from_slice(&track[k * n..(k + 1) * n]);
        }
    }
    FlowEnsemble::from_parts(spec.clone(), field.split(), times.to_vec(), positions, scheme, h_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_must_be_whole_steps() {
        assert_eq!(steps_per_gap(&[0.0, 0.5, 1.0], 0.1).unwrap(), vec![5, 5]);
        assert!(steps_per_gap(&[0.0, 0.25], 0.1).is_err());
        assert!(steps_per_gap(&[0.1, 0.2], 0.1).is_err());
        assert!(steps_per_gap(&[0.0, 0.2, 0.2], 0.1).is_err());
    }

    #[test]
    fn exponential_growth_with_rk4() {
        let f = |_: f64, x: &[f64], out: &mut [f64]| {
            out[0] = x[0];
            Ok(())
        };
        let xs = integrate_ode(&f, &[1.0], &[0.0, 1.0], Scheme::Rk4, 1e-3).unwrap();
        assert!((xs[1][0] - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn euler_is_first_order() {
        let f = |_: f64, x: &[f64], out: &mut [f64]| {
            out[0] = x[0];
            Ok(())
        };
        let e1 = (integrate_ode(&f, &[1.0], &[0.0, 1.0], Scheme::Euler, 1e-2).unwrap()[1][0] - 1f64.exp()).abs();
        let e2 = (integrate_ode(&f, &[1.0], &[0.0, 1.0], Scheme::Euler, 5e-3).unwrap()[1][0] - 1f64.exp()).abs();
        assert!((e1 / e2 - 2.0).abs() < 0.05);
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_: f64, x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] * 1e300;
            Ok(())
        };
        assert!(matches!(integrate_ode(&f, &[10.0], &[0.0, 1.0], Scheme::Rk4, 0.5), Err(Error::BlowUp { .. })));
    }
}
