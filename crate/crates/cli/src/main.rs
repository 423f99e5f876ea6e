//! `hubopt`: run, validate and export capacity-expansion studies.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 bad usage, 3 config,
//! series or model error, 4 infeasible, 5 unbounded, 6 solver failure
//! (iteration limit or numerical breakdown). For a batch the first failing
//! scenario in config order decides the code.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hubopt::catalog;
use hubopt::lp::{export_interchange, Format};
use hubopt::runner::{self, exit, preset_toml, synth_series, RunError, Study, SynthKind};
use hubopt::solver::SolveOptions;

/// Output directory used when `--out` is not given.
const OUT_ENV: &str = "HUBOPT_OUT";

#[derive(Parser)]
#[command(name = "hubopt", version, about = "Multi-energy capacity expansion with remote renewable hubs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpFormat {
    /// Free-format MPS
    Mps,
    /// Fixed-column MPS (names of at most 8 characters)
    FixedMps,
    /// CPLEX LP text
    Lp,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every scenario of a config and write reports
    Run {
        config: PathBuf,
        /// Report directory; defaults to $HUBOPT_OUT, then ./hubopt-out
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only run the named scenarios
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
    },
    /// Check a config and every scenario system without solving
    Validate { config: PathBuf },
    /// Write the LP of one scenario in an interchange format
    ExportLp {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "mps")]
        format: LpFormat,
        /// Scenario to export; defaults to the first
        #[arg(long)]
        scenario: Option<String>,
        /// Output file; defaults to standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded synthetic series: solar_cf, solar_desert_cf, wind_cf,
    /// wind_trade_cf, wind_polar_cf, elec_demand or gas_demand
    Synth {
        kind: String,
        #[arg(short = 'T', long = "steps")]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Column name; defaults to the kind
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List catalog presets, or print one as a config block
    Presets {
        name: Option<String>,
        #[arg(long, default_value = "node")]
        id: String,
        #[arg(long, default_value = "BE")]
        cluster: String,
    },
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), RunError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| RunError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(config: &Path, out: Option<PathBuf>, only: &[String], max_iter: usize) -> Result<i32, RunError> {
    let mut study = Study::load(config)?;
    if !only.is_empty() {
        for name in only {
            study.scenario(name)?;
        }
        study.config.scenarios.retain(|s| only.contains(&s.name));
    }
    let out = out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hubopt-out"));
    let opts = SolveOptions {
        max_iter,
        ..SolveOptions::default()
    };
    let results = study.solve_all(&opts);
    for (s, r) in study.config.scenarios.iter().zip(&results) {
        match r {
            Ok(rep) => eprintln!("{}: {:?} after {} iterations", s.name, rep.status, rep.iterations),
            Err(e) => eprintln!("error: {e}"),
        }
    }
    runner::write_reports(&out, &study, &results)?;
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap_or_default();
    print!("{summary}");
    eprintln!("reports written to {}", out.display());
    Ok(runner::batch_exit_code(&results))
}

fn validate(config: &Path) -> Result<i32, RunError> {
    let study = Study::load(config)?;
    let mut code = exit::OK;
    for (name, report) in study.validate()? {
        if report.is_empty() {
            println!("{name}: ok");
        } else {
            println!("{name}: {} problem(s)\n{report}", report.len());
            code = exit::CONFIG;
        }
    }
    Ok(code)
}

fn export(config: &Path, format: LpFormat, scenario: Option<&str>, output: Option<&Path>) -> Result<i32, RunError> {
    let study = Study::load(config)?;
    let scenario = match scenario {
        Some(name) => study.scenario(name)?,
        None => &study.config.scenarios[0],
    };
    let (_, lp, _) = study.compile(scenario)?;
    let format = match format {
        LpFormat::Mps => Format::FreeMps,
        LpFormat::FixedMps => Format::FixedMps,
        LpFormat::Lp => Format::LpText,
    };
    match export_interchange(&lp, format) {
        Ok(text) => emit(output, &text).map(|_| exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            Ok(exit::CONFIG)
        }
    }
}

fn synth(kind: &str, steps: usize, seed: u64, name: Option<String>, output: Option<&Path>) -> Result<i32, RunError> {
    let kind: SynthKind = match kind.parse() {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::USAGE);
        }
    };
    let mut file = synth_series(kind, steps, seed);
    if let Some(n) = name {
        file.names[0] = n;
    }
    emit(output, &file.to_csv()).map(|_| exit::OK)
}

fn presets(name: Option<&str>, id: &str, cluster: &str) -> i32 {
    match name {
        None => {
            for n in catalog::list_presets() {
                let p = catalog::preset(n).expect("listed presets exist");
                println!("{n:<18} {}", p.summary);
            }
            exit::OK
        }
        Some(n) => match preset_toml(n, id, cluster) {
            Ok(text) => {
                print!("{text}");
                exit::OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit::CONFIG
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            scenarios,
            max_iter,
        } => run(&config, out, &scenarios, max_iter),
        Command::Validate { config } => validate(&config),
        Command::ExportLp {
            config,
            format,
            scenario,
            output,
        } => export(&config, format, scenario.as_deref(), output.as_deref()),
        Command::Synth {
            kind,
            steps,
            seed,
            name,
            output,
        } => synth(&kind, steps, seed, name, output.as_deref()),
        Command::Presets { name, id, cluster } => Ok(presets(name.as_deref(), &id, &cluster)),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
