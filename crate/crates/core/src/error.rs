use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space split n1={n1}, n2={n2}: both blocks need at least one dimension")]
    InvalidSplit { n1: usize, n2: usize },

    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("time {t} outside the horizon [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("field evaluation produced a non-finite value in component {component} at t={t}")]
    NonFiniteField { component: usize, t: f64 },

    #[error("non-finite sample at node {node}")]
    NonFiniteSample { node: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("growth decomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    DecompositionInvalid { residual: f64, tolerance: f64 },

    #[error(
        "mollifier scale {epsilon} is below the grid spacing {spacing} on axis {axis}; refine the grid"
    )]
    ScaleBelowResolution { epsilon: f64, spacing: f64, axis: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("norm vanishes at scale {epsilon}; the log-log fit is undefined")]
    VanishingNorm { epsilon: f64 },

    #[error("region is empty")]
    EmptyRegion,

    #[error("negative value {value} at node {node}")]
    NegativeValue { node: usize, value: f64 },

    #[error("trajectory of particle {particle} blew up at t={t}")]
    BlowUp { particle: usize, t: f64 },

    #[error("ensembles do not match: {0}")]
    EnsembleMismatch(String),

    #[error("infeasible exponent: alpha={alpha} must exceed 1/(2-mu)={threshold} for mu={mu}")]
    InfeasibleExponent { alpha: f64, mu: f64, threshold: f64 },

    #[error("no feasible parameter above underflow: {0}")]
    NoFeasibleParameter(String),

    #[error("malformed binary data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
