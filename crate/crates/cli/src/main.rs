use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use expball::Error as CoreError;
use expball_cli::{
    parse_config, run_convergence, run_experiment, run_zfield_suite, ExperimentError,
    GateProfile, OUT_DIR_ENV,
};

/// Exit codes: 0 all configured checks pass, 1 a check failed,
/// 2 the solver diverged or reached vacuum, 3 configuration or I/O error.
#[derive(Parser)]
#[command(name = "expball", about = "Compressible gas in a uniformly expanding ball", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit CSV series plus a JSON summary.
    Simulate { config: PathBuf },
    /// Run an experiment and additionally gate on the asymptotic decay
    /// checks (velocity convergence, decay exponents, space-time tail).
    DecayReport { config: PathBuf },
    /// Grid-refinement convergence study of the configured experiment.
    Converge {
        config: PathBuf,
        /// Comma-separated grid sizes in geometric progression, e.g. 100,200,400.
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
    },
    /// Verify the rotation-field identities on random exact polynomials.
    ZfieldVerify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("{message}");
    ExitCode::from(code)
}

fn experiment_exit(e: &ExperimentError) -> u8 {
    match e {
        ExperimentError::Solver(
            CoreError::VacuumReached { .. }
            | CoreError::SolverDiverged { .. }
            | CoreError::PositivityLost { .. },
        ) => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn load_config(path: &PathBuf) -> Result<expball_cli::ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| fail(EXIT_CONFIG, e))
}

fn out_dir(cfg: &expball_cli::ExperimentConfig) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config } => run_and_report(&config, GateProfile::Simulate),
        Command::DecayReport { config } => run_and_report(&config, GateProfile::DecayReport),
        Command::Converge { config, grids } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_convergence(&cfg, &grids, &out_dir(&cfg)) {
                Ok(report) => {
                    for field in &report.fields {
                        println!(
                            "{}: observed order {:.3} ({})",
                            field.field,
                            field.observed_order,
                            if field.pass { "pass" } else { "fail" }
                        );
                    }
                    if report.all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECK_FAILED)
                    }
                }
                Err(e) => fail(experiment_exit(&e), e),
            }
        }
        Command::ZfieldVerify { seed, count } => {
            if count == 0 {
                return fail(EXIT_CONFIG, "count must be at least 1");
            }
            let report = run_zfield_suite(seed, count);
            print!("{}", report.text);
            if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
    }
}

fn run_and_report(config: &PathBuf, gates: GateProfile) -> ExitCode {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run_experiment(&cfg, &out_dir(&cfg), gates) {
        Ok(outcome) => {
            for run in &outcome.summary.runs {
                for check in &run.checks {
                    println!(
                        "[{}] {:<22} {}{}",
                        run.solver,
                        check.name,
                        check.status,
                        match (check.observed, check.threshold) {
                            (Some(o), Some(t)) => format!("  ({o:.6e} vs {t:.6e})"),
                            (Some(o), None) => format!("  ({o:.6e})"),
                            _ => String::new(),
                        }
                    );
                }
            }
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            if outcome.summary.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => fail(experiment_exit(&e), e),
    }
}
