use thiserror::Error;

/// Errors produced by the gas model, the solvers, and the diagnostics.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The Bernoulli argument became nonpositive: the state would sit at or
    /// past vacuum. Carries the location where it happened.
    #[error("vacuum reached at t = {t}, index {index} (enthalpy argument {arg})")]
    VacuumReached { t: f64, index: usize, arg: f64 },

    /// A configuration the closed-form expression does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Cell density dropped to zero or below during a step.
    #[error("positivity lost at t = {t}, cell {cell} (rho = {rho})")]
    PositivityLost { t: f64, cell: usize, rho: f64 },

    /// Non-finite values or a velocity beyond the sanity bound.
    #[error("solver diverged at t = {t}: {msg}")]
    SolverDiverged { t: f64, msg: String },

    /// A diagnostic series does not span enough radius for the check.
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    /// A log-log fit cannot be formed (too few records or nonpositive data).
    #[error("fit undefined: {0}")]
    FitUndefined(String),

    /// A constructor argument violates a type invariant.
    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn param(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter { name, msg: msg.into() }
    }
}
