//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by scenario construction, channel synthesis, the
/// optimizers and the file-format plumbing.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent. Carries the
    /// offending field name so callers can point at the exact input.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A mathematical precondition was violated (non-positive distance,
    /// negative power, coincident positions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested energy cannot be delivered even at full transmit power.
    /// `worst_receiver` is the receiver with the largest shortfall.
    #[error("infeasible: receiver {worst_receiver} cannot reach the energy target even at full power (shortfall {shortfall_w:.3e} W of received RF power)")]
    Infeasible {
        worst_receiver: usize,
        shortfall_w: f64,
    },

    /// A slot-splitting repair would need more time slots than available.
    #[error("schedule does not fit: splitting to the per-slot cap needs {required_slots} slots but only {available_slots} are available")]
    ScheduleOverflow {
        required_slots: usize,
        available_slots: usize,
    },

    /// An iterative solver hit its iteration cap before reaching the
    /// requested tolerance.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A CSV/JSON artifact could not be parsed. `row` is 1-based and
    /// includes the header line.
    #[error("ingestion error at row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Error::NumericalFailure(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
