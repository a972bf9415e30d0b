//! Error type shared across the crate.
//!
//! Admissibility failures (Feller violations, divergent inverse moments,
//! volatility below its floor) are separated from plain argument errors so the
//! CLI can map them to distinct exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error(
        "Feller condition violated: kappa*theta = {kappa_theta} < eta^2/2 = {half_eta_sq}; \
         the square-root process is not almost surely positive"
    )]
    FellerViolated { kappa_theta: f64, half_eta_sq: f64 },

    #[error(
        "inverse moment diverges: E[1/Z(t)] is finite only when kappa*theta >= eta^2 \
         (kappa*theta = {kappa_theta}, eta^2 = {eta_sq})"
    )]
    InverseMomentDiverges { kappa_theta: f64, eta_sq: f64 },

    #[error("volatility floor violated: sigma({at}) = {value} < floor {floor}")]
    VolatilityFloor { at: f64, value: f64, floor: f64 },

    #[error("time ordering violated: s = {s} must satisfy {s} <= {t} = t")]
    TimeOrder { s: f64, t: f64 },

    #[error("delay out of range: {0}")]
    InvalidDelay(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("non-finite portfolio fraction at path {path}, step {step}")]
    NonFinitePortfolio { path: u64, step: usize },

    #[error("Hermite order {n} exceeds the supported cap of {cap}")]
    HermiteOrder { n: u32, cap: u32 },

    #[error("Hermite recurrence overflowed at order {at_order}")]
    HermiteOverflow { at_order: u32 },

    #[error("degenerate conditioning: {0}")]
    Degenerate(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// CLI exit code: 2 for invalid input, 3 for an inadmissible model.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FellerViolated { .. }
            | Error::InverseMomentDiverges { .. }
            | Error::VolatilityFloor { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
