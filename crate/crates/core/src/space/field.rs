use std::fmt;
use std::sync::Arc;

use super::SpaceSplit;
use crate::error::{Error, Result};

/// `b1(t, x1, out)`: writes the first block. It has no access to `x2`.
pub type Block1Fn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// `b2(t, x1, x2, out)`: writes the second block.
pub type Block2Fn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A vector field `b = (b1(t, x1), b2(t, x1, x2))` on `(0, T) x R^N`.
///
/// The first block is evaluated through a closure that never receives `x2`,
/// so its independence from the second block holds by construction.
/// `alpha` and `p` are the declared regularity exponents: `b2` is fractionally
/// differentiable of order `alpha` in `x1`, and the Sobolev derivatives are
/// `p`-integrable.
#[derive(Clone)]
pub struct PartiallyRegularField {
    split: SpaceSplit,
    b1: Arc<Block1Fn>,
    b2: Arc<Block2Fn>,
    alpha: f64,
    p: f64,
    horizon: f64,
}

impl fmt::Debug for PartiallyRegularField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartiallyRegularField")
            .field("split", &self.split)
            .field("alpha", &self.alpha)
            .field("p", &self.p)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl PartiallyRegularField {
    pub fn new<F1, F2>(split: SpaceSplit, alpha: f64, p: f64, horizon: f64, b1: F1, b2: F2) -> Result<Self>
    where
        F1: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        F2: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::from_arcs(split, alpha, p, horizon, Arc::new(b1), Arc::new(b2))
    }

    pub fn from_arcs(
        split: SpaceSplit,
        alpha: f64,
        p: f64,
        horizon: f64,
        b1: Arc<Block1Fn>,
        b2: Arc<Block2Fn>,
    ) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(Error::InvalidField(format!("alpha={alpha} must lie in (1/2, 1)")));
        }
        if !(p > 1.0) {
            return Err(Error::InvalidField(format!("p={p} must exceed 1")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidField(format!("horizon T={horizon} must be positive")));
        }
        Ok(PartiallyRegularField { split, b1, b2, alpha, p, horizon })
    }

    /// The field `b = 0`.
    pub fn zero(split: SpaceSplit, horizon: f64) -> Result<Self> {
        Self::new(
            split,
            0.75,
            2.0,
            horizon,
            |_, _, out: &mut [f64]| out.fill(0.0),
            |_, _, _, out: &mut [f64]| out.fill(0.0),
        )
    }

    pub fn split(&self) -> SpaceSplit {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn b1(&self) -> &Arc<Block1Fn> {
        &self.b1
    }

    pub fn b2(&self) -> &Arc<Block2Fn> {
        &self.b2
    }

    /// Same first block and metadata, new second block.
    pub fn with_b2(&self, b2: Arc<Block2Fn>) -> Self {
        PartiallyRegularField { b2, ..self.clone() }
    }

    /// Evaluates `b(t, x)` into `out` without allocating.
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: out.len() });
        }
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon });
        }
        let (x1, x2) = self.split.blocks(x);
        let (o1, o2) = out.split_at_mut(self.split.n1());
        (self.b1)(t, x1, o1);
        (self.b2)(t, x1, x2, o2);
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { component, t });
        }
        Ok(())
    }

    /// Evaluates `b(t, x) = (b1(t, x1), b2(t, x1, x2))`.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, x, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn field(b1: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static, b2: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> PartiallyRegularField {
        PartiallyRegularField::new(SpaceSplit::planar(), 0.75, 2.0, 1.0, b1, b2).unwrap()
    }

    #[test]
    fn shear_field_evaluates_block_by_block() {
        let b = field(|_, _, o| o[0] = 0.0, |_, x1, _, o| o[0] = x1[0].sin());
        assert_eq!(b.eval(0.0, &[FRAC_PI_2, 5.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn identity_first_block() {
        let b = field(|_, x1, o| o[0] = x1[0], |_, _, _, o| o[0] = 0.0);
        assert_eq!(b.eval(0.0, &[2.0, 7.0]).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn product_second_block() {
        let b = field(|_, x1, o| o[0] = x1[0], |_, x1, x2, o| o[0] = x1[0] * x2[0]);
        assert_eq!(b.eval(0.5, &[3.0, 4.0]).unwrap(), vec![3.0, 12.0]);
    }

    #[test]
    fn rejects_time_outside_horizon() {
        let b = PartiallyRegularField::zero(SpaceSplit::planar(), 1.0).unwrap();
        assert!(matches!(b.eval(1.5, &[0.0, 0.0]), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(b.eval(-0.1, &[0.0, 0.0]), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn reports_the_non_finite_component() {
        let b = field(|_, _, o| o[0] = 1.0, |_, x1, _, o| o[0] = 1.0 / x1[0]);
        match b.eval(0.0, &[0.0, 1.0]) {
            Err(Error::NonFiniteField { component, .. }) => assert_eq!(component, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_regularity() {
        let split = SpaceSplit::planar();
        let z1 = |_: f64, _: &[f64], o: &mut [f64]| o.fill(0.0);
        let z2 = |_: f64, _: &[f64], _: &[f64], o: &mut [f64]| o.fill(0.0);
        assert!(PartiallyRegularField::new(split, 0.5, 2.0, 1.0, z1, z2).is_err());
        assert!(PartiallyRegularField::new(split, 0.7, 1.0, 1.0, z1, z2).is_err());
        assert!(SpaceSplit::new(0, 2).is_err());
    }

    proptest! {
        #[test]
        fn first_block_ignores_x2(x1 in -10.0f64..10.0, a in -10.0f64..10.0, c in -10.0f64..10.0, t in 0.0f64..1.0) {
            let b = field(
                |t, x1, o| o[0] = (x1[0] * 3.0).sin() + t,
                |_, x1, x2, o| o[0] = x1[0] * x2[0],
            );
            let u = b.eval(t, &[x1, a]).unwrap();
            let v = b.eval(t, &[x1, c]).unwrap();
            prop_assert_eq!(u[0].to_bits(), v[0].to_bits());
        }
    }
}
