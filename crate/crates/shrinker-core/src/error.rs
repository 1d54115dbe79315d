//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when evaluating phase-plane quantities.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distinguished point is undefined at the requested energy.
    #[error("point {label} is undefined at c = {c} (requires c >= 2/sqrt(3))")]
    UndefinedPoint { label: &'static str, c: f64 },

    /// Quadrature failed to meet the requested tolerance. Carries the best
    /// estimate and the error bound actually achieved.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound} > tolerance {tolerance}")]
    QuadratureConvergence {
        estimate: f64,
        error_bound: f64,
        tolerance: f64,
    },

    /// The ODE flow ran past its travel budget without meeting the stop event.
    #[error("flow event not reached within {budget} of polar angle (c = {c})")]
    EventNotReached { c: f64, budget: f64 },

    /// The ODE step size collapsed, indicating stiffness or an unreachable
    /// tolerance.
    #[error("flow step size underflow at arc length {s} (h = {h})")]
    StepSizeUnderflow { s: f64, h: f64 },

    /// The conserved quantity drifted beyond its budget during a flow.
    #[error("conservation residual {residual} exceeded budget {budget} during flow")]
    ConservationDrift { residual: f64, budget: f64 },

    /// A closure equation has no root in the search bracket.
    #[error("no root in bracket [{lo}, {hi}] for {equation}")]
    NoRoot {
        equation: String,
        lo: f64,
        hi: f64,
    },

    /// Building the complete catalog failed; names the offending case.
    #[error("catalog construction failed for `{case}`: {reason}")]
    CatalogConstruction { case: String, reason: String },

    /// Assembled curves failed to meet where the abstract network requires.
    #[error("network closure gap {gap} exceeds {budget} at {location}")]
    NetworkClosure {
        location: String,
        gap: f64,
        budget: f64,
    },

    /// A trajectory path is structurally invalid (bad jump, bad arc order).
    #[error("invalid trajectory path: {0}")]
    InvalidPath(String),

    /// A closure-equation string could not be parsed.
    #[error("cannot parse equation `{input}`: {reason}")]
    EquationParse { input: String, reason: String },

    /// Serialization / deserialization failure.
    #[error("serialization error: {0}")]
    Serialization(String),

    /// Writing an export to its sink failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
