//! Decibel conversions.
//!
//! The paper quotes path loss and IBO in dB while every formula uses linear
//! power ratios; these two helpers are the only place the conversion lives.

use crate::{fmath, Error};

/// 10^(x_dB/10).
pub fn db_to_linear(x_db: f64) -> f64 {
    fmath::powf(10.0, x_db / 10.0)
}

/// 10*log10(x). Rejects non-positive inputs.
pub fn linear_to_db(x: f64) -> Result<f64, Error> {
    if !(x > 0.0) {
        return Err(Error::Domain { what: "linear_to_db argument", value: x });
    }
    Ok(10.0 * fmath::log10(x))
}
