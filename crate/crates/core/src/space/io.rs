//! Flat little-endian binary layout for [`GridFunction`].
//!
//! Header, all 64-bit little-endian: `N`, `n1`, `n2` (as `u64`; `n1 = N`,
//! `n2 = 0` when the grid carries no split), `N` resolutions (`u64`), the box
//! bounds as `N` pairs `(lower_i, upper_i)` (`f64`), `components` (`u64`), and
//! the extension flag (`u64`, 0 = zero outside, 1 = periodic). The values
//! follow as row-major `f64`, components interleaved per node.

use std::io::{Read, Write};

use super::{Extension, GridFunction, GridSpec, SpaceSplit};
use crate::error::{Error, Result};

pub(crate) fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub(crate) fn read_usize(r: &mut impl Read, what: &str) -> Result<usize> {
    let v = read_u64(r)?;
    usize::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} does not fit in usize")))
}

const MAX_DIM: usize = 64;

impl GridFunction {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let spec = self.spec();
        let n = spec.dim();
        let (n1, n2) = spec.split().map_or((n, 0), |s| (s.n1(), s.n2()));
        write_u64(w, n as u64)?;
        write_u64(w, n1 as u64)?;
        write_u64(w, n2 as u64)?;
        for &r in spec.resolution() {
            write_u64(w, r as u64)?;
        }
        for axis in 0..n {
            write_f64(w, spec.lower(axis))?;
            write_f64(w, spec.upper(axis))?;
        }
        write_u64(w, self.components() as u64)?;
        write_u64(w, spec.extension().tag())?;
        for &v in self.values() {
            write_f64(w, v)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let n = read_usize(r, "N")?;
        if n == 0 || n > MAX_DIM {
            return Err(Error::Format(format!("implausible dimension N = {n}")));
        }
        let n1 = read_usize(r, "n1")?;
        let n2 = read_usize(r, "n2")?;
        if n1 + n2 != n {
            return Err(Error::Format(format!("n1 + n2 = {} does not match N = {n}", n1 + n2)));
        }
        let resolution = (0..n).map(|_| read_usize(r, "resolution")).collect::<Result<Vec<_>>>()?;
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for _ in 0..n {
            lower.push(read_f64(r)?);
            upper.push(read_f64(r)?);
        }
        let components = read_usize(r, "components")?;
        let tag = read_u64(r)?;
        let extension = Extension::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown extension flag {tag}")))?;
        let mut spec = GridSpec::new(lower, upper, resolution, extension)?;
        if n2 > 0 {
            spec = spec.with_split(SpaceSplit::new(n1, n2)?)?;
        }
        let count = spec
            .len()
            .checked_mul(components)
            .ok_or_else(|| Error::Format("value count overflows".into()))?;
        let values = (0..count).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        GridFunction::new(spec, components, values)
    }
}
