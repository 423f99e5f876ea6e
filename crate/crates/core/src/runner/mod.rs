//! Scenario orchestration: config → system → LP → solution → report files.

pub mod config;
pub mod report;
pub mod series;
pub mod synth;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use config::{preset_toml, Config, ConfigError, EnsOverride, Horizon, Scenario};
pub use series::{SeriesError, SeriesRole, SeriesStore, TimeSeriesFile};
pub use synth::{synth_series, SynthKind, UnknownKind};

use crate::analysis::{scenario_report, AnalysisError, ScenarioReport};
use crate::lp::{compile, CompileError, LpProblem, VariableMap};
use crate::model::{validate_system, EnergySystem, ValidationReport};
use crate::solver::{solve, SolveError, SolveOptions, Status};

/// Process exit codes of the command-line runner.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O or internal failure.
    pub const FAILURE: i32 = 1;
    /// Bad command-line usage.
    pub const USAGE: i32 = 2;
    /// Config, series or model validation error.
    pub const CONFIG: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const UNBOUNDED: i32 = 5;
    /// Iteration limit or numerical breakdown.
    pub const SOLVER: i32 = 6;
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{scenario}` is invalid:\n{report}")]
    Invalid { scenario: String, report: ValidationReport },
    #[error("scenario `{scenario}`: {source}")]
    Compile { scenario: String, source: CompileError },
    #[error("scenario `{scenario}`: {source}")]
    Solve { scenario: String, source: SolveError },
    #[error("scenario `{scenario}`: {source}")]
    Analysis { scenario: String, source: AnalysisError },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("no scenario named `{0}`")]
    UnknownScenario(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Invalid { .. } | RunError::Compile { .. } | RunError::UnknownScenario(_) => {
                exit::CONFIG
            }
            RunError::Solve { .. } => exit::SOLVER,
            RunError::Analysis { .. } | RunError::Io { .. } => exit::FAILURE,
        }
    }
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => exit::OK,
        Status::Infeasible => exit::INFEASIBLE,
        Status::Unbounded => exit::UNBOUNDED,
        Status::IterLimit => exit::SOLVER,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// A loaded configuration and the system its scenarios share.
#[derive(Clone, Debug)]
pub struct Study {
    pub config: Config,
    pub base: EnergySystem,
}

impl Study {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        Self::from_config(Config::load(path)?)
    }

    pub fn from_config(config: Config) -> Result<Self, RunError> {
        let series = config.load_series()?;
        let base = config.build(&series)?;
        Ok(Study { config, base })
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario, RunError> {
        self.config
            .scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| RunError::UnknownScenario(name.to_string()))
    }

    pub fn system(&self, scenario: &Scenario) -> Result<EnergySystem, RunError> {
        Ok(scenario.apply(&self.base, &self.config.source)?)
    }

    /// Every scenario's validation findings, in config order.
    pub fn validate(&self) -> Result<Vec<(String, ValidationReport)>, RunError> {
        self.config
            .scenarios
            .iter()
            .map(|s| Ok((s.name.clone(), validate_system(&self.system(s)?))))
            .collect()
    }

    pub fn compile(&self, scenario: &Scenario) -> Result<(EnergySystem, LpProblem, VariableMap), RunError> {
        let sys = self.system(scenario)?;
        let report = validate_system(&sys);
        if !report.is_empty() {
            return Err(RunError::Invalid {
                scenario: scenario.name.clone(),
                report,
            });
        }
        let (lp, vm) = compile(&sys).map_err(|source| RunError::Compile {
            scenario: scenario.name.clone(),
            source,
        })?;
        Ok((sys, lp, vm))
    }

    /// Validate, compile, solve and analyse one scenario.
    pub fn solve(&self, scenario: &Scenario, opts: &SolveOptions) -> Result<ScenarioReport, RunError> {
        let (sys, lp, vm) = self.compile(scenario)?;
        let name = &scenario.name;
        let sol = solve(&lp, opts).map_err(|source| RunError::Solve {
            scenario: name.clone(),
            source,
        })?;
        scenario_report(name, &sys, &lp, &vm, &sol).map_err(|source| RunError::Analysis {
            scenario: name.clone(),
            source,
        })
    }

    /// Solves every scenario, in parallel, returning results in config order.
    pub fn solve_all(&self, opts: &SolveOptions) -> Vec<Result<ScenarioReport, RunError>> {
        self.config.scenarios.par_iter().map(|s| self.solve(s, opts)).collect()
    }
}

/// Exit code for a batch: the first failure in config order, else success.
pub fn batch_exit_code(results: &[Result<ScenarioReport, RunError>]) -> i32 {
    results
        .iter()
        .map(|r| match r {
            Ok(rep) => status_exit_code(rep.status),
            Err(e) => e.exit_code(),
        })
        .find(|&c| c != exit::OK)
        .unwrap_or(exit::OK)
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes per-scenario reports and the cross-scenario summary into `dir`.
/// Returns the paths written.
pub fn write_reports(dir: &Path, study: &Study, results: &[Result<ScenarioReport, RunError>]) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut rows = Vec::new();
    let messages: Vec<String> = results.iter().map(|r| r.as_ref().err().map(|e| e.to_string()).unwrap_or_default()).collect();
    for ((scenario, result), message) in study.config.scenarios.iter().zip(results).zip(&messages) {
        if let Ok(rep) = result {
            let sub = dir.join(&scenario.name);
            std::fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
            let mut files = vec![
                ("report.json", report::report_json(rep)),
                ("capacities.csv", report::capacities_csv(rep)),
                ("costs.csv", report::costs_csv(rep)),
            ];
            if let Some(ens) = report::ens_prices_csv(rep) {
                files.push(("ens_prices.csv", ens));
            }
            for (name, text) in files {
                let p = sub.join(name);
                write(&p, &text)?;
                written.push(p);
            }
        }
        rows.push(report::SummaryRow {
            name: &scenario.name,
            emission: scenario.emission,
            ens: scenario.ens_label(&study.base),
            report: result.as_ref().map_err(|_| message.clone()),
        });
    }
    for (name, text) in [("summary.csv", report::summary_csv(&rows)), ("summary.txt", report::summary_text(&rows))] {
        let p = dir.join(name);
        write(&p, &text)?;
        written.push(p);
    }
    Ok(written)
}
