//! Application-level error type wrapping the core numerics errors.

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    /// Forwarded numerics/domain error from the core crate.
    Core(mimo_ee_core::Error),
    /// Config file syntax problem.
    Parse { line: usize, msg: String },
    /// A structural invariant of a spec or settings object is violated.
    Validation { invariant: String },
    Io(std::io::Error),
    /// The in-band fraction is undefined: clipping left (almost) no
    /// distortion energy to attribute.
    InsufficientDistortion { energy_ratio: f64 },
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Parse { line, msg } => write!(f, "config line {line}: {msg}"),
            AppError::Validation { invariant } => write!(f, "invalid configuration: {invariant}"),
            AppError::Io(e) => write!(f, "io error: {e}"),
            AppError::InsufficientDistortion { energy_ratio } => write!(
                f,
                "in-band fraction undefined: distortion-to-signal energy ratio {energy_ratio:.3e} \
                 is below the measurable threshold"
            ),
        }
    }
}

impl std::error::Error for AppError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AppError::Core(e) => Some(e),
            AppError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<mimo_ee_core::Error> for AppError {
    fn from(e: mimo_ee_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}
