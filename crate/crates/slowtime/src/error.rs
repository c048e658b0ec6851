//! Crate error type and the coarse classification used for process exit
//! codes.

use thiserror::Error;

/// Coarse error class. Configuration problems and numerical failures map to
/// different process exit codes in the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: dimensions, ranges, malformed files, inconsistent config.
    Config,
    /// The math went wrong at runtime: non-finite values, loss of positive
    /// definiteness, failed convergence guarantees.
    Numerical,
}

/// Unified error type for the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension parameter is out of its documented range.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A value-level validation failed (non-unimodular entry, non-finite
    /// phase, inconsistent lengths inside one container).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A lag index falls outside the grid `-(N-1)..=N-1`.
    #[error("lag {lag} outside the grid for code length {n_len}")]
    LagOutOfRange { lag: isize, n_len: usize },

    /// Two objects that must agree in shape do not.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// The diagonal loading failed to make the iteration matrix positive
    /// definite.
    #[error("diagonal loading insufficient: {0}")]
    Loading(String),

    /// A metric was requested over a region that selects nothing.
    #[error("empty region: {0}")]
    EmptyRegion(String),

    /// A numerical quantity that must be finite is not.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// An emitter's beat frequency exceeds the sampled band.
    #[error("emitter {index} ({kind}) has beat frequency {beat_hz:.3e} Hz >= f_s/2 = {nyquist_hz:.3e} Hz")]
    AliasedBeat {
        index: usize,
        kind: String,
        beat_hz: f64,
        nyquist_hz: f64,
    },

    /// File-format problem, with enough context to find the offending field.
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    /// I/O failure wrapping the OS error.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Classify for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidDimension(_)
            | Error::Validation(_)
            | Error::LagOutOfRange { .. }
            | Error::LengthMismatch(_)
            | Error::EmptyRegion(_)
            | Error::AliasedBeat { .. }
            | Error::Parse { .. }
            | Error::Io { .. } => ErrorClass::Config,
            Error::Loading(_) | Error::NonFinite(_) => ErrorClass::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
