//! Monte-Carlo validation of the closed forms.
//!
//! Each check pairs an estimator run against the analytic value it is meant
//! to reproduce and records a pass verdict at a pinned tolerance. The report
//! is deterministic for a given seed; the CLI exits nonzero when any row
//! fails.

use mimo_ee_core::{bussgang_lambda, distortion_factor, sndr, PaArchitecture, SystemConfig};

use crate::error::AppError;
use crate::mc::{estimate_bussgang, inband_fraction, simulate_link, McSettings};

/// One measured-vs-reference comparison. `pass` is
/// |measured - reference| <= tolerance_rel * |reference| except for band
/// checks (currently the in-band fraction), where the row documents the
/// band in `name` and `tolerance_rel` holds the wider relative excursion.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance_rel: f64,
    /// Batch-means standard error where the estimator provides one.
    pub stderr: Option<f64>,
    pub pass: bool,
}

impl CheckResult {
    fn relative(name: String, measured: f64, reference: f64, tol: f64, stderr: Option<f64>) -> Self {
        let pass = (measured - reference).abs() <= tol * reference.abs();
        CheckResult { name, measured, reference, tolerance_rel: tol, stderr, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Scalar-oracle tolerances from the validation contract.
pub const LAMBDA_TOL: f64 = 0.005;
pub const DISTORTION_TOL: f64 = 0.02;
/// Link-oracle tolerances.
pub const LINK_S_TOL: f64 = 0.03;
pub const LINK_D_TOL: f64 = 0.10;
pub const LINK_GAMMA_TOL: f64 = 0.05;
/// In-band fraction acceptance band around the nominal 2/3.
pub const ETA_BAND: (f64, f64) = (0.60, 0.75);

/// Link-check scenario: M = 32 at 4x back-off, critically sampled 600-bin
/// OFDM, thermal noise over the occupied band. With critical sampling all
/// distortion lands in band, so the closed-form SNDR uses eta = 1.
pub fn link_check_config() -> (SystemConfig, f64) {
    let mut cfg = SystemConfig::table_i(32, 1e-9, PaArchitecture::ClassB);
    cfg.n_u = 600;
    cfg.sigma2 = SystemConfig::noise_power(600, cfg.delta_f);
    cfg.eta = 1.0;
    let p = cfg.m as f64 * cfg.p_max / 4.0; // back-off psi = 4
    (cfg, p)
}

fn link_settings(base: &McSettings) -> McSettings {
    McSettings { n: 600, n_u: 600, oversampling: 1, n_symbols: 200, ..*base }
}

fn eta_settings(base: &McSettings) -> McSettings {
    McSettings { n: 2048, n_u: 512, oversampling: 4, n_symbols: 200, ..*base }
}

/// Runs the validation suite: the scalar Bussgang oracle at each `psi`,
/// then (optionally) the link-level simulator and the oversampled in-band
/// fraction measurement.
pub fn run_validation(
    settings: &McSettings,
    psi_list: &[f64],
    with_link: bool,
    with_eta: bool,
) -> Result<ValidationReport, AppError> {
    settings.validate()?;
    let mut checks = Vec::new();

    for &psi in psi_list {
        let est = estimate_bussgang(psi, settings)?;
        let lambda_ref = bussgang_lambda(psi)?;
        let df_ref = distortion_factor(psi)?;
        checks.push(CheckResult::relative(
            format!("bussgang_lambda(psi={psi})"),
            est.lambda_hat,
            lambda_ref,
            LAMBDA_TOL,
            Some(est.stderr_lambda),
        ));
        checks.push(CheckResult::relative(
            format!("distortion_factor(psi={psi})"),
            est.distortion_factor_hat,
            df_ref,
            DISTORTION_TOL,
            None,
        ));
    }

    if with_link {
        let (cfg, p) = link_check_config();
        let (s_hat, d_hat, gamma_hat) = simulate_link(&cfg, p, &link_settings(settings))?;
        let psi = cfg.m as f64 * cfg.p_max / p;
        let lambda_ref = bussgang_lambda(psi)?;
        let df_ref = distortion_factor(psi)?;
        checks.push(CheckResult::relative(
            "link S_hat/(beta*M*P)".into(),
            s_hat / (cfg.beta * cfg.m as f64 * p),
            lambda_ref,
            LINK_S_TOL,
            None,
        ));
        checks.push(CheckResult::relative(
            "link D_hat [W]".into(),
            d_hat,
            cfg.beta * df_ref * p,
            LINK_D_TOL,
            None,
        ));
        checks.push(CheckResult::relative(
            "link gamma_hat".into(),
            gamma_hat,
            sndr(&cfg, p),
            LINK_GAMMA_TOL,
            None,
        ));
    }

    if with_eta {
        let eta_hat = inband_fraction(4.0, &eta_settings(settings))?;
        let (lo, hi) = ETA_BAND;
        checks.push(CheckResult {
            name: format!("inband_fraction(psi=4) in [{lo}, {hi}]"),
            measured: eta_hat,
            reference: 2.0 / 3.0,
            tolerance_rel: 0.125,
            stderr: None,
            pass: (lo..=hi).contains(&eta_hat),
        });
    }

    Ok(ValidationReport { checks })
}
