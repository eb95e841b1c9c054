use std::io::{Read, Write};

use super::Scheme;
use crate::error::{Error, Result};
use crate::space::io::{read_f64, read_u64, read_usize, write_f64, write_u64};
use crate::space::{GridSpec, SpaceSplit};

/// Particle cloud started from every node of a grid, with positions recorded
/// at a list of times. Positions are stored time-major:
/// `positions[(k * particles + i) * N + j]` is coordinate `j` of particle `i`
/// at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEnsemble {
    spec: GridSpec,
    split: SpaceSplit,
    times: Vec<f64>,
    positions: Vec<f64>,
    scheme: Scheme,
    step: f64,
    compressibility: Option<f64>,
}

impl FlowEnsemble {
    pub(crate) fn from_parts(
        spec: GridSpec,
        split: SpaceSplit,
        times: Vec<f64>,
        positions: Vec<f64>,
        scheme: Scheme,
        step: f64,
    ) -> Result<Self> {
        let n = split.dim();
        if spec.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: spec.dim() });
        }
        let expected = times.len() * spec.len() * n;
        if positions.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: positions.len() });
        }
        if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::EnsembleMismatch("times must start at 0 and increase strictly".into()));
        }
        if let Some(i) = positions.iter().position(|v| !v.is_finite()) {
            let particle = (i / n) % spec.len();
            return Err(Error::BlowUp { particle, t: times[i / n / spec.len()] });
        }
        let mut x = vec![0.0; n];
        for i in 0..spec.len() {
            spec.node_into(i, &mut x);
            if positions[i * n..(i + 1) * n] != x[..] {
                return Err(Error::EnsembleMismatch(format!("particle {i} does not start at its grid node")));
            }
        }
        Ok(FlowEnsemble { spec, split, times, positions, scheme, step, compressibility: None })
    }

    /// Grid of initial positions.
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn split(&self) -> SpaceSplit {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn particles(&self) -> usize {
        self.spec.len()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Position of particle `i` at `times[k]`.
    pub fn position(&self, k: usize, i: usize) -> &[f64] {
        let n = self.dim();
        let at = (k * self.particles() + i) * n;
        &self.positions[at..at + n]
    }

    /// All positions at `times[k]`, particle-major.
    pub fn snapshot(&self, k: usize) -> &[f64] {
        let len = self.particles() * self.dim();
        &self.positions[k * len..(k + 1) * len]
    }

    /// Compressibility estimate, once computed.
    pub fn compressibility(&self) -> Option<f64> {
        self.compressibility
    }

    /// Computes and stores the compressibility estimate against `probe`.
    pub fn estimate_compressibility(&mut self, probe: &GridSpec) -> Result<f64> {
        let l = super::compressibility_constant(self, probe)?;
        self.compressibility = Some(l);
        Ok(l)
    }

    /// Errors unless both ensembles start from the same grid and record the
    /// same times.
    pub fn check_compatible(&self, other: &FlowEnsemble) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::EnsembleMismatch("initial grids differ".into()));
        }
        if self.split != other.split {
            return Err(Error::EnsembleMismatch("space splits differ".into()));
        }
        if self.times != other.times {
            return Err(Error::EnsembleMismatch("recorded times differ".into()));
        }
        Ok(())
    }

    /// Little-endian binary layout: `n1, n2, times, particles, scheme tag`
    /// as u64, `h_t` as f64, then the times and the time-major positions.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        write_u64(w, self.split.n1() as u64)?;
        write_u64(w, self.split.n2() as u64)?;
        write_u64(w, self.times.len() as u64)?;
        write_u64(w, self.particles() as u64)?;
        write_u64(w, self.scheme.tag())?;
        write_f64(w, self.step)?;
        for t in &self.times {
            write_f64(w, *t)?;
        }
        for v in &self.positions {
            write_f64(w, *v)?;
        }
        Ok(())
    }

    /// Reads an ensemble written by [`FlowEnsemble::write_to`]; the initial
    /// grid is not stored and must be supplied.
    pub fn read_from(r: &mut impl Read, spec: &GridSpec) -> Result<Self> {
        let split = SpaceSplit::new(read_usize(r, "n1")?, read_usize(r, "n2")?)?;
        let count = read_usize(r, "time count")?;
        let particles = read_usize(r, "particle count")?;
        if particles != spec.len() {
            return Err(Error::EnsembleMismatch(format!("{particles} particles for a grid of {} nodes", spec.len())));
        }
        let tag = read_u64(r)?;
        let scheme = Scheme::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown scheme tag {tag}")))?;
        let step = read_f64(r)?;
        let times = (0..count).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        let len = count
            .checked_mul(particles)
            .and_then(|v| v.checked_mul(split.dim()))
            .ok_or_else(|| Error::Format("ensemble size overflows".into()))?;
        let positions = (0..len).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        FlowEnsemble::from_parts(spec.clone(), split, times, positions, scheme, step)
    }
}
