use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roughflow_lab::scenarios::for_scenario;
use roughflow_lab::{emit_report, run_scenario, ExperimentConfig, Format, LabError, ScenarioKind, ScenarioReport};

/// Runs the roughflow experiment suite and writes reports.
#[derive(Parser)]
#[command(name = "roughflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mollification rates of a rough profile.
    Rates(Common),
    /// Strong and weak maximal-function ratios on a random corpus.
    Maximal(Common),
    /// Difference quotients, interpolation, U bounds and a seminorm oracle.
    LemmaChecks(Common),
    /// Superlevel decay under refinement of the time step.
    Uniqueness(Common),
    /// Offset shear sequence converging to its limit.
    Stability(Common),
    /// Pairwise superlevel matrix of a partial-sum sequence.
    Compactness(Common),
    /// Measured superlevel set against the itemized right-hand side.
    TheoremBound(Common),
    /// Compressibility and convergence of mollified flows.
    Existence(Common),
    /// Every scenario in turn.
    Suite(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(kinds: &[ScenarioKind], subcommand: Option<ScenarioKind>, common: &Common) -> Result<bool, LabError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let (Some(wanted), Some(named)) = (subcommand, config.scenario) {
        if wanted != named {
            return Err(LabError::Config(format!("config is for scenario {}, not {}", named.name(), wanted.name())));
        }
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common.out.clone().or_else(|| config.out.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("reports"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let mut all_passed = true;
    for &kind in kinds {
        let cfg = for_scenario(&config, kind);
        let report: ScenarioReport = pool.install(|| run_scenario(&cfg))?;
        for v in &report.verdicts {
            eprintln!("{:<14} {:<5} {}: {} = {:.6e}", kind.name(), if v.passed { "PASS" } else { "FAIL" }, v.check, v.metric, v.value);
        }
        emit_report(&report, common.format, &out)?;
        all_passed &= report.passed();
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kinds, subcommand, common): (Vec<ScenarioKind>, _, _) = match &cli.command {
        Command::Rates(c) => (vec![ScenarioKind::Rates], Some(ScenarioKind::Rates), c),
        Command::Maximal(c) => (vec![ScenarioKind::Maximal], Some(ScenarioKind::Maximal), c),
        Command::LemmaChecks(c) => (vec![ScenarioKind::LemmaChecks], Some(ScenarioKind::LemmaChecks), c),
        Command::Uniqueness(c) => (vec![ScenarioKind::Uniqueness], Some(ScenarioKind::Uniqueness), c),
        Command::Stability(c) => (vec![ScenarioKind::Stability], Some(ScenarioKind::Stability), c),
        Command::Compactness(c) => (vec![ScenarioKind::Compactness], Some(ScenarioKind::Compactness), c),
        Command::TheoremBound(c) => (vec![ScenarioKind::TheoremBound], Some(ScenarioKind::TheoremBound), c),
        Command::Existence(c) => (vec![ScenarioKind::Existence], Some(ScenarioKind::Existence), c),
        Command::Suite(c) => (ScenarioKind::ALL.to_vec(), None, c),
    };
    match run(&kinds, subcommand, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
