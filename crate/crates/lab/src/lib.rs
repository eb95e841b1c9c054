//! Experiment runner for `roughflow`: declarative configs, the scenario
//! suite, and JSON/CSV reports.

use thiserror::Error;

pub mod config;
pub mod fields;
pub mod report;
pub mod scenarios;

pub use config::{ExperimentConfig, ScenarioKind};
pub use report::{emit_report, Format, Relation, ScenarioReport, Verdict};
pub use scenarios::run_scenario;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] roughflow::Error),
    #[error("{stage}: {source}")]
    Stage { stage: String, source: roughflow::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Attaches the stage name to a kernel error.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &str) -> Result<T, LabError>;
}

impl<T> StageContext<T> for roughflow::Result<T> {
    fn stage(self, stage: &str) -> Result<T, LabError> {
        self.map_err(|source| LabError::Stage { stage: stage.into(), source })
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lab.md")]
mod book_lab {}
