use super::maximal::maximal_values;
use super::norms::{lp_norm, weak_l1};
use crate::error::{Error, Result};
use crate::space::grid::partial_derivative;
use crate::space::{GridFunction, SpaceSplit};

/// Diagonal scaling `A` with `delta1` on the `x1` block and `delta2` on the
/// `x2` block, `delta1 <= delta2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnisotropicScale {
    delta1: f64,
    delta2: f64,
    split: SpaceSplit,
}

impl AnisotropicScale {
    pub fn new(delta1: f64, delta2: f64, split: SpaceSplit) -> Result<Self> {
        if !(delta1 > 0.0 && delta2 > 0.0 && delta1.is_finite() && delta2.is_finite()) {
            return Err(Error::InvalidArgument(format!("scales ({delta1}, {delta2}) must be positive")));
        }
        if delta1 > delta2 {
            return Err(Error::InvalidArgument(format!("delta1 = {delta1} exceeds delta2 = {delta2}")));
        }
        Ok(AnisotropicScale { delta1, delta2, split })
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    pub fn split(&self) -> SpaceSplit {
        self.split
    }

    /// Diagonal entries of `A`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![self.delta1; self.split.n1()];
        d.resize(self.split.dim(), self.delta2);
        d
    }

    /// `|A^{-1} v|`.
    pub fn inverse_norm(&self, v: &[f64]) -> f64 {
        let n1 = self.split.n1();
        v.iter()
            .enumerate()
            .map(|(j, x)| {
                let d = if j < n1 { self.delta1 } else { self.delta2 };
                (x / d).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Which partial derivatives enter the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeBlock {
    #[default]
    All,
    X1,
    X2,
}

impl DerivativeBlock {
    fn contains(self, axis: usize, n1: usize) -> bool {
        match self {
            DerivativeBlock::All => true,
            DerivativeBlock::X1 => axis < n1,
            DerivativeBlock::X2 => axis >= n1,
        }
    }
}

/// `|d_j f|` per axis, Euclidean across components.
fn partial_magnitudes(f: &GridFunction) -> Result<Vec<Vec<f64>>> {
    let spec = f.spec();
    let comps: Vec<Vec<f64>> = (0..f.components()).map(|c| f.component(c)).collect();
    (0..spec.dim())
        .map(|axis| {
            let mut acc = vec![0.0; spec.len()];
            for c in &comps {
                for (a, d) in acc.iter_mut().zip(partial_derivative(spec, c, axis)?) {
                    *a += d * d;
                }
            }
            Ok(acc.into_iter().map(f64::sqrt).collect())
        })
        .collect()
}

fn check_split(f: &GridFunction, scale: &AnisotropicScale) -> Result<()> {
    let dim = f.spec().dim();
    if scale.split.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: scale.split.dim() });
    }
    Ok(())
}

/// `U(x) = M(sum_j |d_j f(A .)| A_jj)(A^{-1} x)` at every node.
///
/// The grid is pulled back by `A^{-1}`, where node `k` sits at `A^{-1} x_k`
/// with spacings `h_j / A_jj`; there `d_j [f(A z)] = A_jj (d_j f)(A z)` is
/// exactly `A_jj` times the original difference quotient. The maximal
/// function is taken on the pulled-back lattice and read back node by node.
pub fn anisotropic_u(f: &GridFunction, scale: &AnisotropicScale) -> Result<GridFunction> {
    anisotropic_u_block(f, scale, DerivativeBlock::All)
}

/// [`anisotropic_u`] restricted to the derivatives of one block.
pub fn anisotropic_u_block(f: &GridFunction, scale: &AnisotropicScale, block: DerivativeBlock) -> Result<GridFunction> {
    check_split(f, scale)?;
    let spec = f.spec();
    let diag = scale.diagonal();
    let n1 = scale.split.n1();
    let partials = partial_magnitudes(f)?;
    let mut g = vec![0.0; spec.len()];
    for (axis, d) in partials.iter().enumerate() {
        if block.contains(axis, n1) {
            for (acc, v) in g.iter_mut().zip(d) {
                *acc += v * diag[axis];
            }
        }
    }
    let pulled = spec.rescaled(&diag);
    GridFunction::scalar(spec.clone(), maximal_values(&pulled, &g))
}

/// Both sides of the weak and strong bounds on `U`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UBoundReport {
    /// `|||U|||_{M^1}`.
    pub weak_lhs: f64,
    /// `delta1 sum_{j <= n1} ||d_j f||_1 + delta2 sum_{j > n1} ||d_j f||_1`.
    pub weak_rhs: f64,
    /// `||U||_p`.
    pub strong_lhs: f64,
    /// `delta1 sum_{j <= n1} ||d_j f||_p + delta2 sum_{j > n1} ||d_j f||_p`.
    pub strong_rhs: f64,
    pub p: f64,
}

impl UBoundReport {
    /// Empirical constant of the weak bound; `0/0` reads as `0`.
    pub fn weak_ratio(&self) -> f64 {
        ratio(self.weak_lhs, self.weak_rhs)
    }

    pub fn strong_ratio(&self) -> f64 {
        ratio(self.strong_lhs, self.strong_rhs)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Evaluates both sides of the weak-`L^1` and `L^p` bounds on [`anisotropic_u`].
pub fn u_bound_check(f: &GridFunction, scale: &AnisotropicScale, p: f64) -> Result<UBoundReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("strong bound needs p > 1, got {p}")));
    }
    check_split(f, scale)?;
    let spec = f.spec();
    let u = anisotropic_u(f, scale)?;
    let diag = scale.diagonal();
    let partials = partial_magnitudes(f)?;
    let mut weak_rhs = 0.0;
    let mut strong_rhs = 0.0;
    for (axis, d) in partials.iter().enumerate() {
        weak_rhs += diag[axis] * lp_norm(spec, d, 1.0, None)?;
        strong_rhs += diag[axis] * lp_norm(spec, d, p, None)?;
    }
    Ok(UBoundReport {
        weak_lhs: weak_l1(spec, u.values(), None)?,
        weak_rhs,
        strong_lhs: lp_norm(spec, u.values(), p, None)?,
        strong_rhs,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::maximal_function;
    use crate::space::{Extension, GridSpec};

    fn plane(res: usize) -> GridSpec {
        GridSpec::cube(2, 0.0, 1.0, res, Extension::ZeroOutside).unwrap().with_split(SpaceSplit::planar()).unwrap()
    }

    #[test]
    fn identity_scaling_is_the_plain_maximal_function() {
        let spec = plane(13);
        let f = GridFunction::from_fn(spec.clone(), |x| (4.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let scale = AnisotropicScale::new(1.0, 1.0, SpaceSplit::planar()).unwrap();
        let u = anisotropic_u(&f, &scale).unwrap();
        let d0 = f.partial(0, 0).unwrap();
        let d1 = f.partial(0, 1).unwrap();
        let g: Vec<f64> = d0.iter().zip(&d1).map(|(a, b)| a.abs() + b.abs()).collect();
        let expected = maximal_function(&GridFunction::scalar(spec, g).unwrap()).unwrap();
        assert_eq!(u.values(), expected.values());
    }

    #[test]
    fn constants_give_zero() {
        let f = GridFunction::constant(plane(9), 2.0).unwrap();
        let scale = AnisotropicScale::new(0.1, 1.0, SpaceSplit::planar()).unwrap();
        assert!(anisotropic_u(&f, &scale).unwrap().values().iter().all(|v| *v == 0.0));
        let r = u_bound_check(&f, &scale, 2.0).unwrap();
        assert_eq!((r.weak_lhs, r.weak_rhs, r.strong_lhs, r.strong_rhs), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn second_coordinate_gives_one() {
        let f = GridFunction::from_fn(plane(11), |x| x[1]).unwrap();
        let scale = AnisotropicScale::new(0.1, 1.0, SpaceSplit::planar()).unwrap();
        for v in anisotropic_u(&f, &scale).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn scales_must_be_ordered() {
        assert!(AnisotropicScale::new(2.0, 1.0, SpaceSplit::planar()).is_err());
        assert!(AnisotropicScale::new(0.0, 1.0, SpaceSplit::planar()).is_err());
    }

    #[test]
    fn inverse_norm_scales_each_block() {
        let s = AnisotropicScale::new(0.5, 2.0, SpaceSplit::planar()).unwrap();
        assert!((s.inverse_norm(&[1.0, 2.0]) - 5f64.sqrt()).abs() < 1e-15);
    }
}
