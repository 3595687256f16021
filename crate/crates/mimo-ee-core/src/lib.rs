//! Energy efficiency of a massive-MIMO OFDM downlink with clipping PAs.
//!
//! Closed-form link model for a single-user MRT system whose per-antenna
//! soft-limiter PAs are characterized through the Bussgang decomposition,
//! plus a bracketing/bisection optimizer for the EE-maximizing transmit
//! power. Everything is deterministic f64 arithmetic; the Monte-Carlo
//! validation machinery lives in the companion `mimo-ee` crate.
//!
//! The crate is `no_std` by default-capable: disable the `std` feature and
//! enable `libm` to run without the standard library. No allocator is
//! required either way.
//!
//! ```
//! use mimo_ee_core::{
//!     db_to_linear, find_stationary_power, OptimizerSettings, PaArchitecture, SystemConfig,
//! };
//!
//! let cfg = SystemConfig::table_i(4, db_to_linear(-90.0), PaArchitecture::ClassB);
//! let sol = find_stationary_power(&cfg, &OptimizerSettings::for_config(&cfg)).unwrap();
//! assert!((sol.point.p - 7.865).abs() < 0.01);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// reference values are written with 17 significant digits so they round-trip
// f64 exactly, and domain guards use `!(x > 0.0)` to reject NaN along with
// the out-of-range sign
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("enable at least one of the `std` or `libm` features");

mod error;
mod fmath;
pub mod link;
pub mod optim;
pub mod pa;
pub mod special;
pub mod units;

pub use error::Error;
pub use link::{
    dd_dp, dr_dp, energy_efficiency, f_expanded, f_of_p, gamma_saturation, rate,
    received_distortion_power, received_signal_power, sndr, total_power, OperatingPoint,
    SystemConfig,
};
pub use optim::{
    asymptotic_probe, baseline_fixed_ibo, find_stationary_power, grid_search_oracle,
    AsymptoticsReport, GridSpec, OptimizerSettings, StationarySolution,
};
pub use pa::{
    bussgang_lambda, distortion_factor, dlambda_dp, dppa_dp, ibo, pa_consumed_power,
    soft_limiter, PaArchitecture, PaOperatingState,
};
pub use special::{erf, erfc};
pub use units::{db_to_linear, linear_to_db};
