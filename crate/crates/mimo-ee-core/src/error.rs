//! Error type shared by every fallible operation in the crate.

use core::fmt;

/// Errors produced by the closed-form model and the optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// An argument left the documented domain of the operation.
    Domain {
        /// Name of the offending parameter or quantity.
        what: &'static str,
        /// The rejected value.
        value: f64,
    },
    /// A bracket-expansion loop in the optimizer ran past its iteration cap,
    /// meaning the sign structure promised by Lemma 1 could not be established
    /// numerically for this configuration.
    ExpansionExceeded {
        /// Which loop gave up: `"upper"` (doubling) or `"lower"` (halving).
        side: &'static str,
        /// Last power probed before giving up [W].
        last_p: f64,
        /// Number of expansions performed.
        iterations: u32,
    },
    /// The objective derivative evaluated to NaN inside a bisection bracket.
    NonFiniteEvaluation {
        /// Power at which the evaluation failed [W].
        p: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => {
                write!(f, "domain error: {what} = {value} is outside the valid range")
            }
            Error::ExpansionExceeded { side, last_p, iterations } => write!(
                f,
                "bracket expansion exceeded {iterations} iterations on the {side} side (last P = {last_p} W)"
            ),
            Error::NonFiniteEvaluation { p } => {
                write!(f, "f(P) evaluated to a non-finite value at P = {p} W")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
