use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, unit_sphere_area};
use crate::space::{Extension, GridFunction};

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Standard mollifier `phi(z) = c_n exp(-1 / (1 - |z|^2))` on the unit ball of
/// `R^n`, rescaled to `phi_eps(z) = eps^{-n} phi(z / eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierKernel {
    dim: usize,
    epsilon: f64,
    normalization: f64,
}

impl MollifierKernel {
    pub fn standard(dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("mollifier dimension must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier scale {epsilon} must be positive")));
        }
        // radial integral of the unnormalized bump
        let radial = adaptive_simpson(&|r: f64| r.powi(dim as i32 - 1) * bump(r * r), 0.0, 1.0, 1e-16);
        let mass = if dim == 1 { 2.0 * radial } else { unit_sphere_area(dim) * radial };
        Ok(MollifierKernel { dim, epsilon, normalization: 1.0 / mass })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same profile at another scale.
    pub fn at_scale(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier scale {epsilon} must be positive")));
        }
        Ok(MollifierKernel { epsilon, ..*self })
    }

    /// Unit-scale profile `phi(z)`.
    pub fn profile(&self, z: &[f64]) -> f64 {
        self.normalization * bump(z.iter().map(|v| v * v).sum())
    }

    /// Scaled kernel `phi_eps(z)`.
    pub fn scaled(&self, z: &[f64]) -> f64 {
        let r2 = z.iter().map(|v| v * v).sum::<f64>() / (self.epsilon * self.epsilon);
        self.normalization * bump(r2) / self.epsilon.powi(self.dim as i32)
    }

    /// Cosine transform `int phi(z) cos(xi z) dz` of the one-dimensional
    /// unit-scale profile. Convolving `cos(k x)` with `phi_eps` multiplies it
    /// by this transform at `xi = k * eps`.
    pub fn cosine_transform(&self, xi: f64) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::InvalidArgument("cosine transform is defined for 1D kernels".into()));
        }
        let n = self.normalization;
        // split into pieces shorter than a period so Simpson resolves the oscillation
        let pieces = ((xi.abs() / std::f64::consts::PI).ceil() as usize + 1).max(4);
        let w = 1.0 / pieces as f64;
        let total: f64 = (0..pieces)
            .map(|i| {
                let a = i as f64 * w;
                adaptive_simpson(&|z: f64| n * bump(z * z) * (xi * z).cos(), a, a + w, 1e-17)
            })
            .sum();
        Ok(2.0 * total)
    }
}

/// Result of a mollification: the smoothed function and whether the kernel
/// support reached past the box onto nonzero data under zero extension.
#[derive(Debug, Clone)]
pub struct Mollified {
    pub function: GridFunction,
    pub support_leaks: bool,
}

struct Stencil {
    // per tap: offsets along the x1 axes, in grid steps
    offsets: Vec<Vec<isize>>,
    weights: Vec<f64>,
}

fn stencil(f: &GridFunction, kernel: &MollifierKernel) -> Result<Stencil> {
    let spec = f.spec();
    let n1 = spec.x1_dims();
    if kernel.dim() != n1 {
        return Err(Error::DimensionMismatch { expected: n1, got: kernel.dim() });
    }
    let eps = kernel.epsilon();
    let h: Vec<f64> = (0..n1).map(|a| spec.spacing(a)).collect();
    for (axis, &ha) in h.iter().enumerate() {
        if eps < ha {
            return Err(Error::ScaleBelowResolution { epsilon: eps, spacing: ha, axis });
        }
    }
    let reach: Vec<isize> = h.iter().map(|ha| (eps / ha).floor() as isize).collect();
    let cell: f64 = h.iter().product();
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    let mut o: Vec<isize> = reach.iter().map(|r| -r).collect();
    let mut z = vec![0.0; n1];
    loop {
        for a in 0..n1 {
            z[a] = o[a] as f64 * h[a];
        }
        let w = kernel.scaled(&z) * cell;
        if w > 0.0 {
            offsets.push(o.clone());
            weights.push(w);
        }
        // odometer over the stencil box
        let mut a = n1;
        loop {
            if a == 0 {
                let total: f64 = crate::reduce::pairwise_sum(&weights);
                for w in &mut weights {
                    *w /= total;
                }
                return Ok(Stencil { offsets, weights });
            }
            a -= 1;
            if o[a] < reach[a] {
                o[a] += 1;
                break;
            }
            o[a] = -reach[a];
        }
    }
}

/// Convolution in the `x1` block only, `f^eps(x1, x2) = sum_z f(x1 - z, x2) phi_eps(z) h^{n1}`,
/// with the sampled kernel renormalized to sum to one. `x2` slices are never mixed.
pub fn mollify_x1(f: &GridFunction, kernel: &MollifierKernel) -> Result<Mollified> {
    let st = stencil(f, kernel)?;
    let spec = f.spec();
    let n1 = spec.x1_dims();
    let comps = f.components();
    let res = spec.resolution().to_vec();
    let strides = spec.strides();
    let periodic = spec.extension() == Extension::Periodic;
    let values = f.values();

    // flat offsets per tap, resolved per node
    let out: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .flat_map_iter(|node| {
            let idx = spec.multi_index(node);
            let mut acc = vec![0.0; comps];
            'tap: for (o, &w) in st.offsets.iter().zip(&st.weights) {
                let mut src = node as isize;
                for a in 0..n1 {
                    let k = idx[a] as isize - o[a];
                    let r = res[a] as isize;
                    let kk = if periodic {
                        k.rem_euclid(r)
                    } else if k < 0 || k >= r {
                        continue 'tap;
                    } else {
                        k
                    };
                    src += (kk - idx[a] as isize) * strides[a] as isize;
                }
                let base = src as usize * comps;
                for c in 0..comps {
                    acc[c] += w * values[base + c];
                }
            }
            acc
        })
        .collect();

    let mut support_leaks = false;
    if !periodic {
        let eps = kernel.epsilon();
        support_leaks = (0..spec.len()).any(|node| {
            let nonzero = values[node * comps..(node + 1) * comps].iter().any(|v| *v != 0.0);
            nonzero && {
                let idx = spec.multi_index(node);
                (0..n1).any(|a| {
                    let h = spec.spacing(a);
                    let to_face = (idx[a].min(res[a] - 1 - idx[a])) as f64 * h;
                    to_face < eps
                })
            }
        });
    }
    Ok(Mollified { function: GridFunction::new(spec.clone(), comps, out)?, support_leaks })
}
