//! Closed-form link-level model.
//!
//! Single user, M-antenna MRT downlink over i.i.d. Rayleigh fading with one
//! soft-limiter PA per antenna. Channel hardening plus OFDM averaging justify
//! the flat (frequency-independent) treatment, so every quantity reduces to a
//! scalar function of the total transmit power P:
//!
//! * wanted power   S = beta * lambda * M * P,
//! * distortion     D = eta * beta * (1 - e^{-Psi} - lambda) * P,
//! * SNDR           gamma = S / (sigma^2 + D),
//! * rate           R = N_U * delta_f * log2(1 + gamma),
//! * consumed power P_tot = P_PA + P_const + M * P_SPRF,
//! * efficiency     EE = R / P_tot,
//!
//! and the optimizer's objective derivative f(P) = d ln(EE)/dP, implemented
//! in two algebraically identical but independently coded forms.

use crate::pa::{
    bussgang_lambda, distortion_factor, dlambda_dp, dppa_dp, ibo, pa_consumed_power,
    PaArchitecture,
};
use crate::{fmath, special, Error};

const LN_2: f64 = core::f64::consts::LN_2;
const PI: f64 = core::f64::consts::PI;

/// Static system description: everything except the transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Occupied subcarriers N_U.
    pub n_u: u32,
    /// Subcarrier spacing [Hz].
    pub delta_f: f64,
    /// In-band share of the clipping distortion, (0, 1].
    pub eta: f64,
    /// Receiver noise power over the occupied subcarriers [W].
    pub sigma2: f64,
    /// Constant site power [W].
    pub p_const: f64,
    /// Per-RF-chain power [W].
    pub p_sprf: f64,
    /// Per-PA saturation power [W].
    pub p_max: f64,
    /// Antenna count M.
    pub m: u32,
    /// Linear large-scale channel gain, (0, 1].
    pub beta: f64,
    /// PA consumed-power architecture.
    pub arch: PaArchitecture,
}

impl SystemConfig {
    /// Thermal noise power over the occupied band:
    /// -174 dBm/Hz + 10 log10(N_U * delta_f), converted to watts.
    pub fn noise_power(n_u: u32, delta_f: f64) -> f64 {
        let dbm = -174.0 + 10.0 * fmath::log10(n_u as f64 * delta_f);
        fmath::powf(10.0, (dbm - 30.0) / 10.0)
    }

    /// Configuration with the Table-I defaults: N_U = 1200, delta_f = 15 kHz,
    /// eta = 2/3, P_const = 348 W, P_SPRF = 23 W, P_max = 160 W, and sigma2
    /// derived from the noise-density formula.
    pub fn table_i(m: u32, beta: f64, arch: PaArchitecture) -> SystemConfig {
        SystemConfig {
            n_u: 1200,
            delta_f: 15e3,
            eta: 2.0 / 3.0,
            sigma2: SystemConfig::noise_power(1200, 15e3),
            p_const: 348.0,
            p_sprf: 23.0,
            p_max: 160.0,
            m,
            beta,
            arch,
        }
    }

    /// Occupied bandwidth B = N_U * delta_f [Hz].
    pub fn bandwidth(&self) -> f64 {
        self.n_u as f64 * self.delta_f
    }

    /// Checks every field invariant, naming the first violation.
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_u == 0 {
            return Err(Error::Domain { what: "subcarrier count N_U", value: 0.0 });
        }
        if !(self.delta_f > 0.0) {
            return Err(Error::Domain { what: "subcarrier spacing delta_f", value: self.delta_f });
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Domain { what: "in-band fraction eta", value: self.eta });
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::Domain { what: "noise power sigma2", value: self.sigma2 });
        }
        if !(self.p_const > 0.0) {
            return Err(Error::Domain { what: "constant power P_const", value: self.p_const });
        }
        if !(self.p_sprf > 0.0) {
            return Err(Error::Domain { what: "per-chain power P_SPRF", value: self.p_sprf });
        }
        if !(self.p_max > 0.0) {
            return Err(Error::Domain { what: "saturation power P_max", value: self.p_max });
        }
        if self.m == 0 {
            return Err(Error::Domain { what: "antenna count M", value: 0.0 });
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Domain { what: "channel gain beta", value: self.beta });
        }
        Ok(())
    }
}

/// Every link quantity evaluated at one transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Total transmit power [W].
    pub p: f64,
    /// Input back-off Psi.
    pub psi: f64,
    /// Bussgang factor lambda.
    pub lambda: f64,
    /// Received wanted-signal power [W].
    pub s: f64,
    /// Received in-band distortion power [W].
    pub d: f64,
    /// SNDR.
    pub gamma: f64,
    /// Rate [bit/s].
    pub r: f64,
    /// PA consumed power [W].
    pub p_pa: f64,
    /// Total consumed power [W].
    pub p_tot: f64,
    /// Energy efficiency [bit/J].
    pub ee: f64,
}

impl OperatingPoint {
    /// Evaluates the full operating point at power `p` > 0.
    pub fn evaluate(cfg: &SystemConfig, p: f64) -> Result<OperatingPoint, Error> {
        let psi = ibo(p, cfg.m, cfg.p_max)?;
        let lambda = bussgang_lambda(psi)?;
        let s = received_signal_power(cfg, p, lambda);
        let d = received_distortion_power(cfg, p, psi, lambda);
        let gamma = s / (cfg.sigma2 + d);
        let r = cfg.bandwidth() * fmath::ln_1p(gamma) / LN_2;
        let p_pa = pa_consumed_power(psi, cfg.m, cfg.p_max, cfg.arch)?;
        let p_tot = p_pa + cfg.p_const + cfg.m as f64 * cfg.p_sprf;
        let ee = r / p_tot;
        Ok(OperatingPoint { p, psi, lambda, s, d, gamma, r, p_pa, p_tot, ee })
    }
}

/// Received wanted-signal power S = beta * lambda * M * P [W], Eq. (7).
pub fn received_signal_power(cfg: &SystemConfig, p: f64, lambda: f64) -> f64 {
    debug_assert!(p >= 0.0);
    cfg.beta * lambda * cfg.m as f64 * p.max(0.0)
}

/// Received in-band distortion power D = eta * beta * (1 - e^{-Psi} - lambda) * P
/// [W], Eq. (9).
///
/// The factor is recomputed from `psi` in the cancellation-stable form;
/// `lambda` is taken for signature symmetry with Eq. (9) and cross-checked in
/// debug builds (the naive 1 - e^{-Psi} - lambda subtraction is exactly what
/// the stable form exists to avoid).
pub fn received_distortion_power(cfg: &SystemConfig, p: f64, psi: f64, lambda: f64) -> f64 {
    debug_assert!(p >= 0.0);
    if !(p > 0.0) {
        return 0.0;
    }
    let df = distortion_factor(psi).unwrap_or(0.0);
    debug_assert!(
        psi > 25.0 || (df - (-fmath::expm1(-psi) - lambda)).abs() <= 1e-9,
        "distortion factor inconsistent with supplied lambda"
    );
    cfg.eta * cfg.beta * df * p
}

/// SNDR gamma(P), Eq. (10); 0 at P = 0.
pub fn sndr(cfg: &SystemConfig, p: f64) -> f64 {
    if !(p > 0.0) {
        return 0.0;
    }
    let psi = cfg.m as f64 * cfg.p_max / p;
    let lambda = bussgang_lambda(psi).unwrap_or(1.0);
    let s = received_signal_power(cfg, p, lambda);
    let d = received_distortion_power(cfg, p, psi, lambda);
    s / (cfg.sigma2 + d)
}

/// Rate R = B * log2(1 + gamma) [bit/s], Eq. (11); 0 at P = 0.
pub fn rate(cfg: &SystemConfig, p: f64) -> f64 {
    cfg.bandwidth() * fmath::ln_1p(sndr(cfg, p)) / LN_2
}

/// Total consumed power P_tot = P_PA + P_const + M * P_SPRF [W].
pub fn total_power(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    let psi = ibo(p, cfg.m, cfg.p_max)?;
    Ok(pa_consumed_power(psi, cfg.m, cfg.p_max, cfg.arch)?
        + cfg.p_const
        + cfg.m as f64 * cfg.p_sprf)
}

/// Energy efficiency EE = R / P_tot [bit/J], Eq. (14).
pub fn energy_efficiency(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    Ok(rate(cfg, p) / total_power(cfg, p)?)
}

/// Rate derivative dR/dP [bit/s/W], appendix closed form.
pub fn dr_dp(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    let psi = ibo(p, cfg.m, cfg.p_max)?;
    let lambda = bussgang_lambda(psi)?;
    let d = received_distortion_power(cfg, p, psi, lambda);
    let noise_plus_d = cfg.sigma2 + d;
    let gamma = received_signal_power(cfg, p, lambda) / noise_plus_d;
    let dlam = dlambda_dp(p, psi)?;
    let dd = dd_dp(cfg, p)?;
    let bracket = (dlam * p + lambda) * noise_plus_d - lambda * p * dd;
    Ok(cfg.bandwidth() * cfg.m as f64 * cfg.beta / (LN_2 * (1.0 + gamma))
        * bracket
        / (noise_plus_d * noise_plus_d))
}

/// Distortion derivative dD/dP, appendix closed form
/// eta * beta * (1 - e^{-Psi} - lambda - P dlambda/dP - Psi e^{-Psi}).
pub fn dd_dp(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    let psi = ibo(p, cfg.m, cfg.p_max)?;
    if psi > 700.0 {
        // every clipping term is exactly zero at this back-off
        return Ok(0.0);
    }
    let df = distortion_factor(psi)?;
    let dlam = dlambda_dp(p, psi)?;
    Ok(cfg.eta * cfg.beta * (df - p * dlam - psi * fmath::exp(-psi)))
}

/// Case-2 saturation constants: (gamma_0, C) with
/// C = sigma^2 + eta * beta * (1 - pi/4) * M * P_max and
/// gamma_0 = pi * M^2 * beta * P_max / (4 C).
pub fn gamma_saturation(cfg: &SystemConfig) -> (f64, f64) {
    let m = cfg.m as f64;
    let c = cfg.sigma2 + cfg.eta * cfg.beta * (1.0 - PI / 4.0) * m * cfg.p_max;
    (PI * m * m * cfg.beta * cfg.p_max / (4.0 * c), c)
}

/// Objective derivative f(P) = d ln(EE)/dP in the compositional form
/// (1/R) dR/dP - (1/P_tot) dP_PA/dP. This is the shipped default;
/// [`f_expanded`] is the independently coded cross-check.
pub fn f_of_p(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    let psi = ibo(p, cfg.m, cfg.p_max)?;
    let r = rate(cfg, p);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain { what: "rate at this P (gamma = 0)", value: r });
    }
    let p_tot = total_power(cfg, p)?;
    Ok(dr_dp(cfg, p)? / r - dppa_dp(psi, cfg.arch)? / p_tot)
}

/// Objective derivative in the expanded appendix grouping
/// (19a)*(19b)*(19c) - (19d), kept as a separate code path on purpose.
///
/// The paper prints a stray bandwidth factor B in the numerator of (19a);
/// it cancels against the B inside R = B log2(1+gamma) when f is derived
/// from (1/R) dR/dP, and keeping it would make f carry units of Hz/W. The
/// term is implemented without it, which is what makes the two forms agree
/// to near machine precision.
pub fn f_expanded(cfg: &SystemConfig, p: f64) -> Result<f64, Error> {
    let psi = ibo(p, cfg.m, cfg.p_max)?;
    let m = cfg.m as f64;
    let lambda = bussgang_lambda(psi)?;
    let d = received_distortion_power(cfg, p, psi, lambda);
    let noise_plus_d = cfg.sigma2 + d;
    let gamma = m * lambda * p * cfg.beta / noise_plus_d;
    let log2_term = fmath::ln_1p(gamma) / LN_2;
    if !(log2_term > 0.0) {
        return Err(Error::Domain { what: "log2(1+gamma) at this P", value: log2_term });
    }

    let (a, am1) = if psi > 700.0 {
        (0.0, 1.0)
    } else {
        (fmath::exp(-psi), -fmath::expm1(-psi))
    };
    let sqrt_psi = fmath::sqrt(psi);

    let t1 = m * cfg.beta / (LN_2 * (1.0 + gamma) * log2_term);
    let t2 = fmath::sqrt(lambda) * (am1 - psi * a) / (noise_plus_d * noise_plus_d);
    let t3 = cfg.sigma2
        - 0.5 * fmath::sqrt(PI) * cfg.beta * cfg.eta * m * cfg.p_max * special::erfc(sqrt_psi)
            / sqrt_psi;
    let t4 = dppa_dp(psi, cfg.arch)? / total_power(cfg, p)?;
    Ok(t1 * t2 * t3 - t4)
}
