//! Experiment driver for the expanding-ball gas laboratory: configuration
//! parsing, run orchestration, convergence studies, the rotation-field
//! identity suite, and deterministic report emission.

pub mod config;
pub mod experiment;
pub mod report;
pub mod svg;
pub mod zsuite;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use experiment::{run_convergence, run_experiment, ExperimentError, GateProfile};
pub use zsuite::run_zfield_suite;

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "EXPBALL_OUT_DIR";
