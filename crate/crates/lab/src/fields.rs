//! Built-in vector fields, described declaratively in configs.

use serde::{Deserialize, Serialize};

use roughflow::harmonic::MollifierKernel;
use roughflow::space::{PartiallyRegularField, SpaceSplit};

use crate::LabError;

/// Base shape of a one-dimensional profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Zero,
    /// The constant `1`.
    Constant,
    /// The identity `x`.
    Linear,
    /// `sin(frequency x)`.
    Sine { frequency: f64 },
    /// `sum_{k=1}^{terms} 2^{-alpha k} cos(2^k x)`, Hölder of order `alpha`.
    Weierstrass { alpha: f64, terms: u32 },
}

fn one() -> f64 {
    1.0
}

/// `amplitude * base(x - shift) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub offset: f64,
}

impl Profile {
    pub fn new(kind: ProfileKind) -> Self {
        Profile { kind, amplitude: 1.0, shift: 0.0, offset: 0.0 }
    }

    pub fn weierstrass(alpha: f64, terms: u32) -> Self {
        Profile::new(ProfileKind::Weierstrass { alpha, terms })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Hölder exponent the profile is declared with, if rough.
    pub fn roughness(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Weierstrass { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Evaluator of the profile, optionally convolved with the standard
    /// mollifier at scale `epsilon`. Every base shape is a trigonometric
    /// polynomial plus an affine part, so convolution multiplies each mode
    /// by the kernel's cosine transform and leaves the affine part alone.
    pub fn evaluator(&self, epsilon: Option<f64>) -> Result<ProfileFn, LabError> {
        let mut f = ProfileFn {
            modes: Vec::new(),
            slope: 0.0,
            constant: 0.0,
            shift: self.shift,
            amplitude: self.amplitude,
            offset: self.offset,
        };
        match self.kind {
            ProfileKind::Zero => {}
            ProfileKind::Constant => f.constant = 1.0,
            ProfileKind::Linear => f.slope = 1.0,
            ProfileKind::Sine { frequency } => f.modes.push(Mode { frequency, coefficient: 1.0, sine: true }),
            ProfileKind::Weierstrass { alpha, terms } => {
                for k in 1..=terms as i32 {
                    f.modes.push(Mode { frequency: 2f64.powi(k), coefficient: 2f64.powf(-alpha * k as f64), sine: false });
                }
            }
        }
        if let Some(eps) = epsilon {
            let kernel = MollifierKernel::standard(1, eps)?;
            for m in &mut f.modes {
                m.coefficient *= kernel.cosine_transform(m.frequency * eps)?;
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Mode {
    frequency: f64,
    coefficient: f64,
    sine: bool,
}

/// Compiled profile, cheap to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFn {
    modes: Vec<Mode>,
    slope: f64,
    constant: f64,
    shift: f64,
    amplitude: f64,
    offset: f64,
}

impl ProfileFn {
    pub fn eval(&self, x: f64) -> f64 {
        let y = x - self.shift;
        let mut v = self.slope * y + self.constant;
        for m in &self.modes {
            let phase = m.frequency * y;
            v += m.coefficient * if m.sine { phase.sin() } else { phase.cos() };
        }
        self.amplitude * v + self.offset
    }
}

/// A planar field `b = (b1(x1), b2(x1, x2))` from the built-in library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// `b = 0`.
    Zero,
    /// `b = (rate x1, 0)`.
    Linear { rate: f64 },
    /// `b = (0, g(x1))`.
    Shear { profile: Profile },
    /// `b = (0, W(x1))` with the Weierstrass profile `W`.
    Weierstrass { alpha: f64, terms: u32 },
    /// `b = (p1(x1), p2(x1) + x2_rate x2)`.
    Coupled {
        b1: Profile,
        b2: Profile,
        #[serde(default)]
        x2_rate: f64,
    },
}

impl FieldSpec {
    /// Declared fractional order of `b2` in `x1`.
    pub fn alpha(&self) -> f64 {
        let rough = match self {
            FieldSpec::Shear { profile } => profile.roughness(),
            FieldSpec::Weierstrass { alpha, .. } => Some(*alpha),
            FieldSpec::Coupled { b2, .. } => b2.roughness(),
            _ => None,
        };
        rough.unwrap_or(0.75)
    }

    /// The field on `(0, horizon)`, with `b2` mollified in `x1` at scale
    /// `epsilon` when given.
    pub fn build(&self, horizon: f64, epsilon: Option<f64>) -> Result<PartiallyRegularField, LabError> {
        let split = SpaceSplit::planar();
        let alpha = self.alpha();
        let zero = Profile::new(ProfileKind::Zero);
        let (p1, p2, x2_rate) = match self {
            FieldSpec::Zero => (zero.clone(), zero, 0.0),
            FieldSpec::Linear { rate } => (Profile::new(ProfileKind::Linear).with_amplitude(*rate), zero, 0.0),
            FieldSpec::Shear { profile } => (zero, profile.clone(), 0.0),
            FieldSpec::Weierstrass { alpha, terms } => (zero, Profile::weierstrass(*alpha, *terms), 0.0),
            FieldSpec::Coupled { b1, b2, x2_rate } => (b1.clone(), b2.clone(), *x2_rate),
        };
        let f1 = p1.evaluator(None)?;
        let f2 = p2.evaluator(epsilon)?;
        Ok(PartiallyRegularField::new(
            split,
            alpha,
            2.0,
            horizon,
            move |_, x1: &[f64], out: &mut [f64]| out[0] = f1.eval(x1[0]),
            move |_, x1: &[f64], x2: &[f64], out: &mut [f64]| out[0] = f2.eval(x1[0]) + x2_rate * x2[0],
        )?)
    }

    /// Same field with `offset` added to `b2`.
    pub fn shifted(&self, offset: f64) -> FieldSpec {
        match self {
            FieldSpec::Zero => FieldSpec::Shear { profile: Profile::new(ProfileKind::Zero).with_offset(offset) },
            FieldSpec::Linear { rate } => FieldSpec::Coupled {
                b1: Profile::new(ProfileKind::Linear).with_amplitude(*rate),
                b2: Profile::new(ProfileKind::Zero).with_offset(offset),
                x2_rate: 0.0,
            },
            FieldSpec::Shear { profile } => {
                FieldSpec::Shear { profile: profile.clone().with_offset(profile.offset + offset) }
            }
            FieldSpec::Weierstrass { alpha, terms } => {
                FieldSpec::Shear { profile: Profile::weierstrass(*alpha, *terms).with_offset(offset) }
            }
            FieldSpec::Coupled { b1, b2, x2_rate } => {
                FieldSpec::Coupled { b1: b1.clone(), b2: b2.clone().with_offset(b2.offset + offset), x2_rate: *x2_rate }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_evaluate() {
        let p = Profile { kind: ProfileKind::Sine { frequency: 2.0 }, amplitude: 3.0, shift: 0.5, offset: 1.0 };
        let f = p.evaluator(None).unwrap();
        assert!((f.eval(1.0) - (3.0 * 1f64.sin() + 1.0)).abs() < 1e-15);
        let w = Profile::weierstrass(0.5, 2).evaluator(None).unwrap();
        let expected = 0.5f64.sqrt() * 2f64.cos() + 0.5 * 4f64.cos();
        assert!((w.eval(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn mollification_damps_modes_and_keeps_affine_parts() {
        let lin = Profile::new(ProfileKind::Linear).evaluator(Some(0.3)).unwrap();
        assert_eq!(lin.eval(0.7), 0.7);
        let rough = Profile::weierstrass(0.6, 12);
        let sharp = rough.evaluator(None).unwrap();
        let smooth = rough.evaluator(Some(0.1)).unwrap();
        assert!(smooth.eval(0.0) < sharp.eval(0.0));
    }

    #[test]
    fn configs_parse() {
        let f: FieldSpec = toml::from_str(
            "kind = \"coupled\"\nx2_rate = 0.1\n[b1]\nkind = \"sine\"\nfrequency = 1.0\namplitude = 0.3\n[b2]\nkind = \"weierstrass\"\nalpha = 0.6\nterms = 10\n",
        )
        .unwrap();
        assert_eq!(f.alpha(), 0.6);
        let b = f.build(1.0, Some(0.05)).unwrap();
        assert!(b.eval(0.5, &[0.2, 0.3]).unwrap()[0] > 0.0);
    }

    #[test]
    fn shifted_shear_adds_to_b2() {
        let f = FieldSpec::Weierstrass { alpha: 0.75, terms: 4 };
        let a = f.build(1.0, None).unwrap();
        let b = f.shifted(0.25).build(1.0, None).unwrap();
        let (va, vb) = (a.eval(0.0, &[0.3, 0.0]).unwrap(), b.eval(0.0, &[0.3, 0.0]).unwrap());
        assert_eq!(va[0], vb[0]);
        assert!((vb[1] - va[1] - 0.25).abs() < 1e-15);
    }
}
