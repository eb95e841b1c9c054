use rayon::prelude::*;

use super::{PartiallyRegularField, SpaceSplit};
use crate::error::{Error, Result};

/// How a grid function is continued outside its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// Zero outside the box: the grid samples a compactly supported function.
    ZeroOutside,
    /// The node lattice is a discrete torus: index `res` wraps to index `0`.
    Periodic,
}

impl Extension {
    pub(crate) fn tag(self) -> u64 {
        match self {
            Extension::ZeroOutside => 0,
            Extension::Periodic => 1,
        }
    }

    pub(crate) fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Extension::ZeroOutside),
            1 => Some(Extension::Periodic),
            _ => None,
        }
    }
}

/// A uniform node lattice on an axis-aligned box.
///
/// Nodes are ordered row-major: the last axis varies fastest. Node `k` on
/// axis `i` sits at `lower[i] + k * length[i] / divisions[i]`, which places
/// the box endpoints exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    // lower + length; node `divisions` sits here exactly
    end: Vec<f64>,
    divisions: Vec<usize>,
    resolution: Vec<usize>,
    extension: Extension,
    split: Option<SpaceSplit>,
}

impl GridSpec {
    /// Box `[lower_i, upper_i]` with `resolution_i` nodes per axis, both
    /// endpoints included.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>, extension: Extension) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(Error::InvalidGrid(format!(
                "axis counts disagree: {} lower, {} upper, {} resolutions",
                lower.len(),
                upper.len(),
                resolution.len()
            )));
        }
        for axis in 0..lower.len() {
            if resolution[axis] < 2 {
                return Err(Error::InvalidGrid(format!("axis {axis} needs at least 2 nodes")));
            }
            if !(lower[axis].is_finite() && upper[axis].is_finite() && upper[axis] > lower[axis]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: bounds [{}, {}] are not an interval",
                    lower[axis], upper[axis]
                )));
            }
        }
        let divisions = resolution.iter().map(|r| r - 1).collect();
        Ok(GridSpec { lower, end: upper, divisions, resolution, extension, split: None })
    }

    /// Periodic lattice with `resolution_i` nodes covering one period starting
    /// at `lower_i`; the last node sits one spacing before `lower_i + period_i`.
    pub fn periodic(lower: Vec<f64>, period: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let upper: Vec<f64> = lower.iter().zip(&period).map(|(a, p)| a + p).collect();
        let mut spec = GridSpec::new(lower, upper, resolution, Extension::Periodic)?;
        spec.divisions = spec.resolution.clone();
        Ok(spec)
    }

    /// Cube `[lower, upper]^dim` with the same resolution on every axis.
    pub fn cube(dim: usize, lower: f64, upper: f64, resolution: usize, extension: Extension) -> Result<Self> {
        GridSpec::new(vec![lower; dim], vec![upper; dim], vec![resolution; dim], extension)
    }

    /// Attaches the `(x1, x2)` split; its total dimension must match the grid.
    pub fn with_split(mut self, split: SpaceSplit) -> Result<Self> {
        if split.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: split.dim() });
        }
        self.split = Some(split);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn split(&self) -> Option<SpaceSplit> {
        self.split
    }

    /// Number of leading axes forming the `x1` block; the whole grid when no
    /// split is attached.
    pub fn x1_dims(&self) -> usize {
        self.split.map_or(self.dim(), |s| s.n1())
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.lower[axis]
    }

    /// Coordinate of the last node on `axis`.
    pub fn upper(&self, axis: usize) -> f64 {
        self.coord(axis, self.resolution[axis] - 1)
    }

    fn length(&self, axis: usize) -> f64 {
        self.end[axis] - self.lower[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length(axis) / self.divisions[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Measure of one grid cell, `prod h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Euclidean diameter of the node box.
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let w = self.spacing(a) * (self.resolution[a] - 1) as f64;
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for axis in (0..self.dim().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.resolution[axis + 1];
        }
        strides
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        if k == self.divisions[axis] {
            return self.end[axis];
        }
        self.lower[axis] + (k as f64 * self.length(axis)) / self.divisions[axis] as f64
    }

    pub fn multi_index_into(&self, mut index: usize, out: &mut [usize]) {
        for axis in (0..self.dim()).rev() {
            out[axis] = index % self.resolution[axis];
            index /= self.resolution[axis];
        }
    }

    pub fn multi_index(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.multi_index_into(index, &mut out);
        out
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.resolution).fold(0, |acc, (&k, &r)| acc * r + k)
    }

    pub fn node_into(&self, index: usize, out: &mut [f64]) {
        let mut rest = index;
        for axis in (0..self.dim()).rev() {
            let k = rest % self.resolution[axis];
            rest /= self.resolution[axis];
            out[axis] = self.coord(axis, k);
        }
    }

    pub fn node(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.node_into(index, &mut out);
        out
    }

    /// Euclidean norm of every node, in node order.
    pub fn node_norms(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len())
            .map(|i| {
                self.node_into(i, &mut x);
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// Mask of nodes with `|x| <= radius`.
    pub fn ball_mask(&self, radius: f64) -> Vec<bool> {
        self.node_norms().into_iter().map(|n| n <= radius).collect()
    }

    /// Same lattice with every spacing divided by `scale[i]`: the image of the
    /// grid under `x -> diag(scale)^{-1} x`.
    pub(crate) fn rescaled(&self, scale: &[f64]) -> GridSpec {
        GridSpec {
            lower: self.lower.iter().zip(scale).map(|(a, s)| a / s).collect(),
            end: self.end.iter().zip(scale).map(|(b, s)| b / s).collect(),
            ..self.clone()
        }
    }
}

/// Scalar or vector samples on a [`GridSpec`], node-major with components
/// interleaved: `values[node * components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    components: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidArgument("a grid function needs at least one component".into()));
        }
        let expected = spec.len() * components;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { node: i / components });
        }
        Ok(GridFunction { spec, components, values })
    }

    pub fn scalar(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(spec, 1, values)
    }

    pub fn constant(spec: GridSpec, value: f64) -> Result<Self> {
        let n = spec.len();
        GridFunction::new(spec, 1, vec![value; n])
    }

    /// Scalar function from a closure of the node coordinates.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        sample_to_grid(&|_, x: &[f64], out: &mut [f64]| out[0] = f(x), &spec, 0.0, 1)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub(crate) fn require_scalar(&self) -> Result<&[f64]> {
        if self.components != 1 {
            return Err(Error::InvalidArgument(format!(
                "expected a scalar grid function, got {} components",
                self.components
            )));
        }
        Ok(&self.values)
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.components).copied().collect()
    }

    /// Pointwise Euclidean norm across components.
    pub fn magnitudes(&self) -> Vec<f64> {
        if self.components == 1 {
            return self.values.iter().map(|v| v.abs()).collect();
        }
        self.values
            .chunks_exact(self.components)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.spec.clone(), self.components, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Finite-difference derivative of component `c` along `axis`.
    pub fn partial(&self, c: usize, axis: usize) -> Result<Vec<f64>> {
        partial_derivative(&self.spec, &self.component(c), axis)
    }

    /// Gradient of a scalar function: `N` components `d_j f`.
    pub fn gradient(&self) -> Result<GridFunction> {
        let values = self.require_scalar()?;
        let n = self.spec.dim();
        let partials = (0..n)
            .map(|axis| partial_derivative(&self.spec, values, axis))
            .collect::<Result<Vec<_>>>()?;
        let mut out = vec![0.0; self.spec.len() * n];
        for (axis, d) in partials.iter().enumerate() {
            for (node, v) in d.iter().enumerate() {
                out[node * n + axis] = *v;
            }
        }
        GridFunction::new(self.spec.clone(), n, out)
    }
}

/// Second-order finite difference along `axis`: central in the interior,
/// wrapped for periodic grids, one-sided second order at the box faces.
pub(crate) fn partial_derivative(spec: &GridSpec, values: &[f64], axis: usize) -> Result<Vec<f64>> {
    let res = spec.resolution()[axis];
    if res < 3 {
        return Err(Error::InvalidGrid(format!("axis {axis} needs at least 3 nodes for differences")));
    }
    let stride = spec.strides()[axis];
    let h = spec.spacing(axis);
    let periodic = spec.extension() == Extension::Periodic;
    let out = (0..values.len())
        .into_par_iter()
        .map(|i| {
            let k = (i / stride) % res;
            let at = |j: usize| values[i - k * stride + j * stride];
            if periodic {
                (at((k + 1) % res) - at((k + res - 1) % res)) / (2.0 * h)
            } else if k == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if k == res - 1 {
                (3.0 * at(k) - 4.0 * at(k - 1) + at(k - 2)) / (2.0 * h)
            } else {
                (at(k + 1) - at(k - 1)) / (2.0 * h)
            }
        })
        .collect();
    Ok(out)
}

/// Samples `f(t, node, out)` at every node, in row-major node order.
pub fn sample_to_grid<F>(f: &F, spec: &GridSpec, t: f64, components: usize) -> Result<GridFunction>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync + ?Sized,
{
    if components == 0 {
        return Err(Error::InvalidArgument("components must be positive".into()));
    }
    let mut values = vec![0.0; spec.len() * components];
    values
        .par_chunks_mut(components)
        .enumerate()
        .try_for_each_init(
            || vec![0.0; spec.dim()],
            |x, (node, out)| {
                spec.node_into(node, x);
                f(t, x, out);
                if out.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(node)
                }
            },
        )
        .map_err(|node| Error::NonFiniteSample { node })?;
    GridFunction::new(spec.clone(), components, values)
}

/// Samples the full vector field `b(t, .)` (N components).
pub fn sample_field(field: &PartiallyRegularField, spec: &GridSpec, t: f64) -> Result<GridFunction> {
    let n = field.dim();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.dim() });
    }
    let mut values = vec![0.0; spec.len() * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each_init(
            || vec![0.0; n],
            |x, (node, out)| {
                spec.node_into(node, x);
                field.eval_into(t, x, out)
            },
        )?;
    GridFunction::new(spec.clone(), n, values)
}

/// Finite-difference divergence `sum_j d_j b_j` of the sampled field.
pub fn divergence_on_grid(field: &PartiallyRegularField, spec: &GridSpec, t: f64) -> Result<GridFunction> {
    let b = sample_field(field, spec, t)?;
    let mut div = vec![0.0; spec.len()];
    for j in 0..spec.dim() {
        for (acc, d) in div.iter_mut().zip(b.partial(j, j)?) {
            *acc += d;
        }
    }
    GridFunction::scalar(spec.clone(), div)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let spec = GridSpec::cube(2, -1.0, 1.0, 5, Extension::ZeroOutside).unwrap();
        let g = sample_to_grid(&|_, _: &[f64], o: &mut [f64]| o[0] = 3.5, &spec, 0.0, 1).unwrap();
        assert!(g.values().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn linear_nodes_in_1d() {
        let spec = GridSpec::new(vec![0.0], vec![1.0], vec![3], Extension::ZeroOutside).unwrap();
        let g = GridFunction::from_fn(spec, |x| x[0]).unwrap();
        assert_eq!(g.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn indicator_counts_endpoints() {
        let spec = GridSpec::new(vec![-2.0], vec![2.0], vec![41], Extension::ZeroOutside).unwrap();
        let g = GridFunction::from_fn(spec, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let ones = g.values().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 11);
        assert_eq!(g.values().len() - ones, 30);
    }

    #[test]
    fn row_major_order_last_axis_fastest() {
        let spec = GridSpec::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![2, 3], Extension::ZeroOutside).unwrap();
        assert_eq!(spec.node(1), vec![0.0, 1.0]);
        assert_eq!(spec.node(3), vec![1.0, 0.0]);
        assert_eq!(spec.linear_index(&[1, 2]), 5);
        assert_eq!(spec.multi_index(5), vec![1, 2]);
    }

    #[test]
    fn sampling_is_evaluation_at_nodes() {
        let spec = GridSpec::cube(2, -1.3, 2.1, 17, Extension::ZeroOutside).unwrap();
        let f = |x: &[f64]| (x[0] * 7.1).sin() * x[1].exp();
        let g = GridFunction::from_fn(spec.clone(), f).unwrap();
        for i in 0..spec.len() {
            assert_eq!(g.values()[i].to_bits(), f(&spec.node(i)).to_bits());
        }
    }

    #[test]
    fn non_finite_sample_reports_node() {
        let spec = GridSpec::new(vec![-1.0], vec![1.0], vec![3], Extension::ZeroOutside).unwrap();
        let err = GridFunction::from_fn(spec, |x| 1.0 / x[0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { node: 1 }));
    }

    #[test]
    fn periodic_lattice_excludes_the_right_endpoint() {
        let spec = GridSpec::periodic(vec![0.0], vec![1.0], vec![4]).unwrap();
        assert_eq!(spec.spacing(0), 0.25);
        assert_eq!(spec.upper(0), 0.75);
    }

    #[test]
    fn periodic_derivative_of_sine() {
        let n = 256;
        let spec = GridSpec::periodic(vec![0.0], vec![std::f64::consts::TAU], vec![n]).unwrap();
        let g = GridFunction::from_fn(spec.clone(), |x| x[0].sin()).unwrap();
        let d = g.partial(0, 0).unwrap();
        let err = (0..n).map(|i| (d[i] - spec.node(i)[0].cos()).abs()).fold(0.0, f64::max);
        assert!(err < 2e-4, "{err}");
    }

    #[test]
    fn one_sided_faces_are_exact_on_quadratics() {
        let spec = GridSpec::new(vec![0.0], vec![1.0], vec![11], Extension::ZeroOutside).unwrap();
        let g = GridFunction::from_fn(spec.clone(), |x| x[0] * x[0]).unwrap();
        let d = g.partial(0, 0).unwrap();
        for i in 0..11 {
            assert!((d[i] - 2.0 * spec.node(i)[0]).abs() < 1e-12);
        }
    }
}
