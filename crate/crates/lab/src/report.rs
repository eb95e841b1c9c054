use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ScenarioKind};
use crate::LabError;

/// Rows of numbers under named columns.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Plot-ready `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Series {
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

/// The acceptance relation a verdict checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Relation {
    pub fn holds(self, value: f64) -> bool {
        match self {
            Relation::AtMost(b) => value <= b,
            Relation::AtLeast(b) => value >= b,
            Relation::Within(lo, hi) => lo <= value && value <= hi,
        }
    }
}

/// One pass/fail check of a metric against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub metric: String,
    pub value: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Verdict {
    pub fn new(check: &str, metric: &str, value: f64, relation: Relation) -> Self {
        Verdict { check: check.into(), metric: metric.into(), value, relation, passed: value.is_finite() && relation.holds(value) }
    }
}

/// Wall-clock time of one stage; kept out of the main report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything a scenario run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioKind,
    pub config: ExperimentConfig,
    pub tables: BTreeMap<String, Table>,
    pub series: BTreeMap<String, Series>,
    pub verdicts: Vec<Verdict>,
    pub extras: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

impl ScenarioReport {
    pub fn new(scenario: ScenarioKind, config: &ExperimentConfig) -> Self {
        ScenarioReport {
            scenario,
            config: config.clone(),
            tables: BTreeMap::new(),
            series: BTreeMap::new(),
            verdicts: Vec::new(),
            extras: BTreeMap::new(),
            timings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&mut self, check: &str, metric: &str, value: f64, relation: Relation) {
        self.verdicts.push(Verdict::new(check, metric, value, relation));
    }

    pub fn find(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    pub fn series(&mut self, y: &str, x: &str, points: Vec<(f64, f64)>) {
        self.series.insert(format!("{y}_vs_{x}"), Series { x: x.into(), y: y.into(), points });
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> Result<(), LabError> {
        self.extras.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timings.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn to_json(&self) -> Result<String, LabError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Output encoding of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Writes the report under `dir` and returns the files written.
///
/// JSON writes `<scenario>.json`. CSV writes `<scenario>_<table>.csv` per
/// table, `<scenario>_verdicts.csv`, and `<y>_vs_<x>.csv` per series. Both
/// write the stage timings to `<scenario>.meta.json`.
pub fn emit_report(report: &ScenarioReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir)?;
    let name = report.scenario.name();
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join(format!("{name}.json"));
            fs::write(&path, report.to_json()?)?;
            written.push(path);
        }
        Format::Csv => {
            for (table_name, table) in &report.tables {
                let path = dir.join(format!("{name}_{table_name}.csv"));
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(|v| v.to_string()))?;
                }
                w.flush()?;
                written.push(path);
            }
            let path = dir.join(format!("{name}_verdicts.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["check", "metric", "value", "relation", "passed"])?;
            for v in &report.verdicts {
                w.write_record([v.check.clone(), v.metric.clone(), v.value.to_string(), relation_text(v.relation), v.passed.to_string()])?;
            }
            w.flush()?;
            written.push(path);
            for (series_name, series) in &report.series {
                let path = dir.join(format!("{series_name}.csv"));
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record([&series.x, &series.y])?;
                for (x, y) in &series.points {
                    w.write_record([x.to_string(), y.to_string()])?;
                }
                w.flush()?;
                written.push(path);
            }
        }
    }
    let meta = dir.join(format!("{name}.meta.json"));
    fs::write(&meta, serde_json::to_string_pretty(&report.timings)?)?;
    written.push(meta);
    Ok(written)
}

fn relation_text(r: Relation) -> String {
    match r {
        Relation::AtMost(b) => format!("<= {b}"),
        Relation::AtLeast(b) => format!(">= {b}"),
        Relation::Within(lo, hi) => format!("in [{lo}, {hi}]"),
    }
}
