use rayon::prelude::*;

use crate::error::Result;
use crate::space::{Extension, GridFunction, GridSpec};

/// Radius ladder `r_k = k * h_min`, `k = 1..=rungs`, reaching past the box
/// diameter. A lattice offset `o` belongs to rung `k` and every later rung
/// when `|o| < r_k`.
struct Ladder {
    hmin: f64,
    rungs: usize,
    // lattice offsets of Z^N inside each ball, zero extension semantics
    ball_counts: Vec<f64>,
}

impl Ladder {
    fn new(spec: &GridSpec) -> Self {
        let hmin = spec.min_spacing();
        let rungs = (spec.diameter() / hmin).floor() as usize + 1;
        let mut ladder = Ladder { hmin, rungs, ball_counts: Vec::new() };
        let h = spec.spacings();
        let reach: Vec<usize> = h.iter().map(|hi| (rungs as f64 * hmin / hi).ceil() as usize).collect();
        let mut hist = vec![0u64; rungs + 2];
        for_each_offset(&reach, |o| {
            hist[ladder.bucket(o, &h)] += 1;
        });
        let mut running = 0u64;
        ladder.ball_counts = hist
            .iter()
            .map(|c| {
                running += c;
                running as f64
            })
            .collect();
        ladder
    }

    /// First rung whose open ball contains the offset, or `rungs + 1`.
    fn bucket(&self, offset: &[isize], h: &[f64]) -> usize {
        let d = offset
            .iter()
            .zip(h)
            .map(|(o, hi)| {
                let v = *o as f64 * hi;
                v * v
            })
            .sum::<f64>()
            .sqrt();
        ((d / self.hmin).floor() as usize + 1).min(self.rungs + 1)
    }

    /// Largest ball average given per-bucket sums.
    fn best(&self, sums: &[f64]) -> f64 {
        let mut running = 0.0;
        let mut best = 0.0f64;
        for k in 1..=self.rungs {
            running += sums[k];
            best = best.max(running / self.ball_counts[k]);
        }
        best
    }
}

/// Visits every offset in the box `|o_i| <= reach_i`, last axis fastest.
fn for_each_offset(reach: &[usize], mut visit: impl FnMut(&[isize])) {
    let mut o: Vec<isize> = reach.iter().map(|r| -(*r as isize)).collect();
    loop {
        visit(&o);
        let mut a = reach.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            if o[a] < reach[a] as isize {
                o[a] += 1;
                break;
            }
            o[a] = -(reach[a] as isize);
        }
    }
}

/// Hardy-Littlewood maximal function of a scalar grid function.
///
/// At each node the average of `|f|` over open balls of radius `k * h_min`
/// is taken for every `k` up to the box diameter, and the largest is kept.
/// Ball averages divide the cell sum over the ball by the number of lattice
/// points of the infinite lattice inside it, which is the discrete ball
/// measure. Under zero extension nodes outside the box contribute zero;
/// under periodic extension they wrap.
///
/// The smallest rung contains only the node itself, so `Mf >= |f|`.
pub fn maximal_function(f: &GridFunction) -> Result<GridFunction> {
    let values = f.require_scalar()?;
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    GridFunction::scalar(f.spec().clone(), maximal_values(f.spec(), &abs))
}

/// Maximal function of nonnegative node values.
pub(crate) fn maximal_values(spec: &GridSpec, abs: &[f64]) -> Vec<f64> {
    let ladder = Ladder::new(spec);
    match spec.extension() {
        Extension::ZeroOutside => zero_extended(spec, &ladder, abs),
        Extension::Periodic => periodic(spec, &ladder, abs),
    }
}

fn zero_extended(spec: &GridSpec, ladder: &Ladder, abs: &[f64]) -> Vec<f64> {
    let h = spec.spacings();
    let res = spec.resolution();
    let n = res.len();
    // bucket of every absolute index offset, laid out like the grid itself
    let table: Vec<u32> = (0..spec.len())
        .map(|i| {
            let o: Vec<isize> = spec.multi_index(i).into_iter().map(|v| v as isize).collect();
            ladder.bucket(&o, &h) as u32
        })
        .collect();
    let strides = spec.strides();
    let last = res[n - 1];
    let outer: usize = spec.len() / last;

    (0..spec.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; ladder.rungs + 2], vec![0usize; n]),
            |(sums, z), node| {
                sums.iter_mut().for_each(|s| *s = 0.0);
                let x = spec.multi_index(node);
                z.iter_mut().for_each(|v| *v = 0);
                for row in 0..outer {
                    let mut base = 0;
                    for a in 0..n - 1 {
                        base += z[a].abs_diff(x[a]) * strides[a];
                    }
                    let row_values = &abs[row * last..(row + 1) * last];
                    let xl = x[n - 1];
                    for (zl, v) in row_values.iter().enumerate() {
                        sums[table[base + zl.abs_diff(xl)] as usize] += v;
                    }
                    // advance the outer multi-index
                    let mut a = n - 1;
                    while a > 0 {
                        a -= 1;
                        z[a] += 1;
                        if z[a] < res[a] {
                            break;
                        }
                        z[a] = 0;
                    }
                }
                ladder.best(sums)
            },
        )
        .collect()
}

fn periodic(spec: &GridSpec, ladder: &Ladder, abs: &[f64]) -> Vec<f64> {
    let h = spec.spacings();
    let res = spec.resolution();
    let n = res.len();
    let strides = spec.strides();
    let reach: Vec<usize> = h.iter().map(|hi| (ladder.rungs as f64 * ladder.hmin / hi).ceil() as usize).collect();
    let mut offsets: Vec<(Vec<isize>, usize)> = Vec::new();
    for_each_offset(&reach, |o| {
        let b = ladder.bucket(o, &h);
        if b <= ladder.rungs {
            offsets.push((o.to_vec(), b));
        }
    });

    (0..spec.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; ladder.rungs + 2],
            |sums, node| {
                sums.iter_mut().for_each(|s| *s = 0.0);
                let x = spec.multi_index(node);
                for (o, b) in &offsets {
                    let mut idx = 0;
                    for a in 0..n {
                        let r = res[a] as isize;
                        idx += ((x[a] as isize + o[a]).rem_euclid(r)) as usize * strides[a];
                    }
                    sums[*b] += abs[idx];
                }
                ladder.best(sums)
            },
        )
        .collect()
}
