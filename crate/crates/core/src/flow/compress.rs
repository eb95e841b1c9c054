use super::FlowEnsemble;
use crate::error::{Error, Result};
use crate::space::GridSpec;

/// Worst density of the pushed-forward uniform measure on the initial grid:
/// the largest `count * cellvol_0 / cellvol_probe` over probe cells and
/// recorded times, at least `1`.
///
/// Probe cells are centred on the probe nodes and half-open along every
/// axis; particles outside the probe cells are not counted.
pub fn compressibility_constant(ens: &FlowEnsemble, probe: &GridSpec) -> Result<f64> {
    let spec = ens.spec();
    let n = ens.dim();
    if probe.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: probe.dim() });
    }
    for axis in 0..n {
        // a finer probe would count single particles and estimate nothing
        if probe.spacing(axis) < spec.spacing(axis) * (1.0 - 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "probe spacing {} on axis {axis} is finer than the initial spacing {}",
                probe.spacing(axis),
                spec.spacing(axis)
            )));
        }
    }
    let h: Vec<f64> = probe.spacings();
    let lower: Vec<f64> = (0..n).map(|a| probe.lower(a)).collect();
    let res = probe.resolution();
    let strides = probe.strides();
    let weight = spec.cell_volume() / probe.cell_volume();
    let mut counts = vec![0u32; probe.len()];
    let mut worst = 0u32;
    for k in 0..ens.times().len() {
        counts.iter_mut().for_each(|c| *c = 0);
        'particle: for x in ens.snapshot(k).chunks_exact(n) {
            let mut cell = 0;
            for a in 0..n {
                // nodes on a cell face go to the upper cell despite rounding
                let t = ((x[a] - lower[a]) / h[a] + 0.5 + 1e-9).floor();
                if t < 0.0 || t >= res[a] as f64 {
                    continue 'particle;
                }
                cell += t as usize * strides[a];
            }
            counts[cell] += 1;
        }
        worst = worst.max(counts.iter().copied().max().unwrap_or(0));
    }
    Ok((worst as f64 * weight).max(1.0))
}
