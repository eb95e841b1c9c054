//! Declarative experiment configuration, read from TOML.
//!
//! Every key has a default, so an empty file is the default suite. Each
//! scenario reads only its own section.

use std::path::Path;

use serde::{Deserialize, Serialize};

use roughflow::flow::Scheme;
use roughflow::space::{Extension, GridSpec, SpaceSplit};

use crate::fields::{FieldSpec, Profile, ProfileKind};
use crate::LabError;

/// The experiments the lab can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Rates,
    Maximal,
    LemmaChecks,
    Uniqueness,
    Stability,
    Compactness,
    TheoremBound,
    Existence,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::Rates,
        ScenarioKind::Maximal,
        ScenarioKind::LemmaChecks,
        ScenarioKind::Uniqueness,
        ScenarioKind::Stability,
        ScenarioKind::Compactness,
        ScenarioKind::TheoremBound,
        ScenarioKind::Existence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Rates => "rates",
            ScenarioKind::Maximal => "maximal",
            ScenarioKind::LemmaChecks => "lemma_checks",
            ScenarioKind::Uniqueness => "uniqueness",
            ScenarioKind::Stability => "stability",
            ScenarioKind::Compactness => "compactness",
            ScenarioKind::TheoremBound => "theorem_bound",
            ScenarioKind::Existence => "existence",
        }
    }
}

/// Planar box grid, zero extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub resolution: [usize; 2],
}

impl GridConfig {
    pub fn square(half_width: f64, resolution: usize) -> Self {
        GridConfig { lower: [-half_width; 2], upper: [half_width; 2], resolution: [resolution; 2] }
    }

    pub fn spec(&self) -> Result<GridSpec, LabError> {
        Ok(GridSpec::new(self.lower.to_vec(), self.upper.to_vec(), self.resolution.to_vec(), Extension::ZeroOutside)?
            .with_split(SpaceSplit::planar())?)
    }
}

/// Recorded times `k T / outputs` and the integration step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub outputs: usize,
    pub step: f64,
    #[serde(default)]
    pub scheme: Scheme,
}

impl TimeConfig {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.outputs)
            .map(|k| if k == self.outputs { self.horizon } else { k as f64 * self.horizon / self.outputs as f64 })
            .collect()
    }
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { horizon: 1.0, outputs: 4, step: 0.05, scheme: Scheme::Rk4 }
    }
}

fn default_scales() -> Vec<[f64; 2]> {
    vec![[0.002, 0.02], [0.01, 0.05], [0.05, 0.05], [0.05, 0.2]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub profile: Profile,
    pub s: f64,
    pub p: f64,
    /// Nodes of the periodic grid on `[0, 2 pi)`.
    pub resolution: usize,
    pub epsilons: Vec<f64>,
    pub conv_band: [f64; 2],
    pub blowup_band: [f64; 2],
    pub min_r2: f64,
    /// Smooth comparison profile, expected to converge at least linearly.
    pub smooth_profile: Profile,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig {
            profile: Profile::weierstrass(0.6, 12),
            s: 0.6,
            p: 1.0,
            resolution: 1 << 14,
            epsilons: (3..=7).map(|k| 2f64.powi(-k)).collect(),
            conv_band: [0.5, 0.7],
            blowup_band: [-0.5, -0.3],
            min_r2: 0.98,
            smooth_profile: Profile::new(ProfileKind::Sine { frequency: 1.0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalConfig {
    pub functions: usize,
    /// Node counts on `[0, 1]`.
    pub resolutions: Vec<usize>,
    pub bumps: usize,
    /// Largest allowed max/min of `||Mu||_2 / ||u||_2` over corpus and resolutions.
    pub band_ratio: f64,
    /// Largest allowed max/min of `|||Mu||| / ||u||_1`.
    pub weak_ratio: f64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig { functions: 20, resolutions: vec![1 << 9, 1 << 10], bumps: 4, band_ratio: 2.0, weak_ratio: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    pub quotient_functions: usize,
    pub quotient_resolution: usize,
    pub pairs: usize,
    pub constant: f64,
    pub interpolation_draws: usize,
    pub interpolation_resolution: usize,
    pub u_resolution: usize,
    pub u_deltas: Vec<f64>,
    /// Largest allowed max/min of the empirical weak constant over `u_deltas`.
    pub u_ratio: f64,
    pub seminorm_resolution: usize,
    pub seminorm_tolerance: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            quotient_functions: 3,
            quotient_resolution: 128,
            pairs: 10_000,
            constant: 4.0,
            interpolation_draws: 100,
            interpolation_resolution: 256,
            u_resolution: 48,
            u_deltas: vec![1.0, 0.5, 0.25],
            u_ratio: 2.0,
            seminorm_resolution: 2001,
            seminorm_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessConfig {
    pub field: FieldSpec,
    /// Mollification scale of `b2`.
    pub epsilon: f64,
    pub grid: GridConfig,
    pub time: TimeConfig,
    /// The fine run uses `step / refinement`.
    pub refinement: usize,
    /// The reference run uses `step / reference_refinement`.
    pub reference_refinement: usize,
    pub gamma: f64,
    pub r: f64,
    pub min_shrink: f64,
    pub scales: Vec<[f64; 2]>,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        UniquenessConfig {
            field: FieldSpec::Coupled {
                b1: Profile::new(ProfileKind::Sine { frequency: 1.0 }).with_amplitude(0.5).with_offset(1.0),
                b2: Profile::weierstrass(0.6, 12),
                x2_rate: 0.0,
            },
            epsilon: 1.0 / 64.0,
            grid: GridConfig::square(1.0, 33),
            time: TimeConfig { horizon: 1.0, outputs: 4, step: 0.25, scheme: Scheme::Rk4 },
            refinement: 4,
            reference_refinement: 64,
            gamma: 0.1,
            r: 1.0,
            min_shrink: 4.0,
            scales: default_scales(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub field: FieldSpec,
    /// `b_n = b + (0, 1/n)`.
    pub ns: Vec<u32>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub gamma: f64,
    pub r: f64,
    pub scales: Vec<[f64; 2]>,
    /// Nodes of the `x1` line on which the fractional norms of `b2` are measured.
    pub seminorm_resolution: usize,
}

fn rough_shear() -> FieldSpec {
    FieldSpec::Weierstrass { alpha: 0.75, terms: 12 }
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            field: rough_shear(),
            ns: vec![2, 4, 8, 16, 32],
            grid: GridConfig::square(1.5, 41),
            time: TimeConfig::default(),
            gamma: 0.05,
            r: 1.0,
            scales: default_scales(),
            seminorm_resolution: 801,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompactnessConfig {
    pub alpha: f64,
    /// Partial sums of the Weierstrass profile with this many terms.
    pub term_counts: Vec<u32>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub gamma: f64,
    pub r: f64,
    pub scales: Vec<[f64; 2]>,
}

impl Default for CompactnessConfig {
    fn default() -> Self {
        CompactnessConfig {
            alpha: 0.75,
            term_counts: vec![2, 4, 6, 8, 10, 12],
            grid: GridConfig::square(1.5, 41),
            time: TimeConfig::default(),
            gamma: 0.05,
            r: 1.0,
            scales: default_scales(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremConfig {
    pub field: FieldSpec,
    pub ns: Vec<u32>,
    pub alpha: f64,
    pub mu: f64,
    pub gamma: f64,
    pub eta: f64,
    pub w_bound: f64,
    /// Mollification scale of the evaluated schedule; must resolve on the grid.
    pub epsilon: f64,
    pub delta2: f64,
    pub r: f64,
    pub lambda: f64,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub time_samples: usize,
    pub scales: Vec<[f64; 2]>,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            field: rough_shear(),
            ns: vec![2, 4, 8, 16, 32],
            alpha: 0.75,
            mu: 0.05,
            gamma: 0.05,
            eta: 0.1,
            w_bound: 1.0,
            epsilon: 0.4,
            delta2: 0.05,
            r: 1.0,
            lambda: 1.0,
            grid: GridConfig::square(4.0, 81),
            time: TimeConfig::default(),
            time_samples: 3,
            scales: default_scales(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExistenceConfig {
    pub field: FieldSpec,
    /// Mollification scales of the approximating sequence, coarse to fine.
    pub epsilons: Vec<f64>,
    pub grid: GridConfig,
    /// Probe cells are this many initial cells wide.
    pub probe_factor: usize,
    pub time: TimeConfig,
    pub gamma: f64,
    pub r: f64,
    pub scales: Vec<[f64; 2]>,
}

impl Default for ExistenceConfig {
    fn default() -> Self {
        ExistenceConfig {
            field: FieldSpec::Coupled {
                // contracts towards x1 = 0, so the density actually grows
                b1: Profile::new(ProfileKind::Sine { frequency: 1.0 }).with_amplitude(-0.5),
                b2: Profile::weierstrass(0.6, 12),
                x2_rate: 0.0,
            },
            epsilons: (2..=5).map(|k| 2f64.powi(-k)).collect(),
            grid: GridConfig::square(1.0, 65),
            probe_factor: 8,
            time: TimeConfig::default(),
            gamma: 0.05,
            r: 1.0,
            scales: default_scales(),
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario the file is meant for; a subcommand naming another one is an error.
    pub scenario: Option<ScenarioKind>,
    pub seed: u64,
    /// Report directory; the `--out` flag takes precedence.
    pub out: Option<String>,
    pub rates: RatesConfig,
    pub maximal: MaximalConfig,
    pub lemma_checks: LemmaConfig,
    pub uniqueness: UniquenessConfig,
    pub stability: StabilityConfig,
    pub compactness: CompactnessConfig,
    pub theorem_bound: TheoremConfig,
    pub existence: ExistenceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: None,
            seed: 7,
            out: None,
            rates: RatesConfig::default(),
            maximal: MaximalConfig::default(),
            lemma_checks: LemmaConfig::default(),
            uniqueness: UniquenessConfig::default(),
            stability: StabilityConfig::default(),
            compactness: CompactnessConfig::default(),
            theorem_bound: TheoremConfig::default(),
            existence: ExistenceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let c = ExperimentConfig::from_toml(
            "seed = 11\n[stability]\nns = [3, 5]\ngamma = 0.1\n[stability.field]\nkind = \"zero\"\n",
        )
        .unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.stability.ns, vec![3, 5]);
        assert_eq!(c.stability.field, FieldSpec::Zero);
        assert_eq!(c.stability.r, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[rates]\nresolutoin = 3\n").is_err());
    }

    #[test]
    fn times_end_at_the_horizon() {
        let t = TimeConfig { horizon: 0.75, outputs: 3, step: 0.05, scheme: Scheme::Euler };
        assert_eq!(t.times(), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn config_survives_json() {
        let c = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
