//! Error types shared across the simulation core.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum PhysicsError {
    /// `h*kp + kd = 0`: the spring-damper has no defined ERP/CFM equivalent.
    #[error("degenerate soft-constraint parameters: h*kp + kd must be positive")]
    DegenerateSoftParams,

    #[error("constraint solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("non-finite state on body {body} at t = {time:.6} s")]
    NonFiniteState { body: usize, time: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A solver or integration failure wrapped with the episode timestamp.
    #[error("episode failed at t = {time:.6} s: {source}")]
    Episode {
        time: f64,
        #[source]
        source: Box<PhysicsError>,
    },
}

/// Errors raised by metric computations over trajectories.
#[derive(Debug, Clone, Error)]
pub enum MetricError {
    #[error("trajectory length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("trajectory dt mismatch: {left} vs {right}")]
    DtMismatch { left: f64, right: f64 },

    #[error("window must contain at least 3 samples, got {0}")]
    WindowTooSmall(usize),

    #[error("series shorter than window: {len} < {window}")]
    SeriesTooShort { len: usize, window: usize },
}

/// Errors raised while reading or writing trajectory CSV files.
#[derive(Debug, Error)]
pub enum CsvError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: bad float in column {column}: {value:?}")]
    BadFloat {
        line: usize,
        column: usize,
        value: String,
    },

    #[error("bad header: {0:?}")]
    BadHeader(String),

    #[error("empty trajectory file")]
    Empty,
}
