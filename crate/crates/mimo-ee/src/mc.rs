//! Monte-Carlo oracles, independent of the closed forms they validate.
//!
//! Three estimators share one PRNG convention (ChaCha12, seeded explicitly,
//! so identical settings give bit-identical estimates):
//!
//! * [`estimate_bussgang`] — scalar clipped complex-Gaussian correlation,
//!   validating the lambda and distortion-factor closed forms;
//! * [`simulate_link`] — an actual MIMO-OFDM MRT downlink with per-antenna
//!   clipping, validating the S, D, and SNDR expressions;
//! * [`inband_fraction`] — oversampled SISO clipped OFDM, measuring how much
//!   of the distortion lands on the occupied subcarriers (the eta factor).
//!
//! Only `soft_limiter` is borrowed from the core crate: the limiter is the
//! system definition, while everything the oracles are meant to check
//! (lambda, distortion factor, S, D, gamma) is re-derived from samples.

use mimo_ee_core::{soft_limiter, SystemConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::error::AppError;

/// Monte-Carlo controls. `n_samples` drives the scalar estimator; the OFDM
/// fields drive the link and in-band oracles. `n_cp` is carried for waveform
/// framing completeness but does not affect any measured power (the cyclic
/// prefix repeats samples whose statistics are already counted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    /// Scalar-validation sample count.
    pub n_samples: u64,
    /// FFT length N.
    pub n: usize,
    /// Cyclic-prefix length (framing only).
    pub n_cp: usize,
    /// Occupied subcarriers N_U.
    pub n_u: usize,
    /// Band oversampling factor; occupied bins must fit in N/oversampling.
    pub oversampling: usize,
    /// OFDM symbols per run.
    pub n_symbols: usize,
    /// PRNG seed; fully determines channel, data, and sample draws.
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            n_samples: 10_000_000,
            n: 2048,
            n_cp: 144,
            n_u: 1200,
            oversampling: 1,
            n_symbols: 200,
            // pinned: the documented tolerances are quoted for this seed
            seed: 6,
        }
    }
}

impl McSettings {
    pub fn validate(&self) -> Result<(), AppError> {
        if self.n_samples == 0 {
            return Err(invariant("n_samples >= 1"));
        }
        if self.n < 2 {
            return Err(invariant("FFT length N >= 2"));
        }
        if self.n_u == 0 || self.n_u > self.n {
            return Err(invariant("0 < N_U <= N"));
        }
        if self.oversampling == 0 {
            return Err(invariant("oversampling >= 1"));
        }
        if self.n_u * self.oversampling > self.n {
            return Err(invariant("band allocation: N_U * oversampling <= N"));
        }
        if self.n_symbols == 0 {
            return Err(invariant("n_symbols >= 1"));
        }
        Ok(())
    }
}

fn invariant(what: &str) -> AppError {
    AppError::Validation { invariant: what.to_string() }
}

/// Scalar Bussgang estimates with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangEstimate {
    /// lambda_hat = (mean(yhat conj y) / mean |y|^2)^2.
    pub lambda_hat: f64,
    /// mean |yhat - sqrt(lambda_hat) y|^2 / mean |y|^2.
    pub distortion_factor_hat: f64,
    /// Batch-means standard error of lambda_hat (100 batches).
    pub stderr_lambda: f64,
    pub n_used: u64,
}

fn standard_complex(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Estimates the Bussgang gain and distortion factor of the soft limiter at
/// back-off `psi` by clipping unit-variance complex Gaussians at P_max = psi.
///
/// Literal two-pass evaluation: the first pass fits the least-squares scale
/// a_hat, the second regenerates the same stream (re-seeded PRNG) and
/// accumulates the residual power |yhat - a_hat y|^2.
pub fn estimate_bussgang(psi: f64, settings: &McSettings) -> Result<BussgangEstimate, AppError> {
    if !(psi > 0.0) {
        return Err(mimo_ee_core::Error::Domain { what: "back-off psi", value: psi }.into());
    }
    settings.validate()?;
    let n = settings.n_samples;
    const BATCHES: usize = 100;

    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut batch_num = [0.0f64; BATCHES];
    let mut batch_den = [0.0f64; BATCHES];
    for i in 0..n {
        let y = standard_complex(&mut rng);
        let yh = soft_limiter(y, psi);
        // yh = c*y with real c, so yh*conj(y) is exactly real
        let corr = (yh * y.conj()).re;
        let pow = y.norm_sqr();
        num += corr;
        den += pow;
        let b = (i as u128 * BATCHES as u128 / n as u128) as usize;
        batch_num[b] += corr;
        batch_den[b] += pow;
    }
    let a_hat = num / den;
    let lambda_hat = a_hat * a_hat;

    let mut mean = 0.0;
    for b in 0..BATCHES {
        let ab = batch_num[b] / batch_den[b];
        mean += ab * ab;
    }
    mean /= BATCHES as f64;
    let mut var = 0.0;
    for b in 0..BATCHES {
        let ab = batch_num[b] / batch_den[b];
        var += (ab * ab - mean) * (ab * ab - mean);
    }
    var /= (BATCHES - 1) as f64;
    let stderr_lambda = (var / BATCHES as f64).sqrt();

    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let mut res = 0.0f64;
    for _ in 0..n {
        let y = standard_complex(&mut rng);
        let yh = soft_limiter(y, psi);
        res += (yh - y * a_hat).norm_sqr();
    }
    let distortion_factor_hat = res / den;

    Ok(BussgangEstimate { lambda_hat, distortion_factor_hat, stderr_lambda, n_used: n })
}

/// Occupied-bin indices: the first n_u/2 and last n_u - n_u/2 FFT bins
/// (baseband band edges around DC, matching the oversampled zero padding).
fn occupied_bins(n: usize, n_u: usize) -> Vec<usize> {
    let lo = n_u / 2;
    let hi = n_u - lo;
    (0..lo).chain(n - hi..n).collect()
}

struct OrthoFft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl OrthoFft {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        OrthoFft {
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    /// Unitary inverse FFT in place.
    fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    /// Unitary forward FFT in place.
    fn forward(&mut self, buf: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

/// Simulates the downlink end to end for one transmit power: per-subcarrier
/// MRT over i.i.d. Rayleigh fading, unitary IFFT per antenna, per-sample soft
/// limiting at cfg.p_max, propagation, and a least-squares decomposition of
/// the received occupied-band signal into wanted and residual power.
///
/// Returns (S_hat, D_hat, gamma_hat) in watts/watts/dimensionless; the noise
/// enters gamma_hat analytically through cfg.sigma2 rather than being
/// sampled.
///
/// The precoder carries per-subcarrier power N*P/N_U, which makes the summed
/// per-antenna mean transmit power exactly P per symbol (unit-modulus data,
/// exact MRT normalization) and the per-antenna per-sample power P/M.
pub fn simulate_link(
    cfg: &SystemConfig,
    p: f64,
    settings: &McSettings,
) -> Result<(f64, f64, f64), AppError> {
    cfg.validate()?;
    settings.validate()?;
    if !(p > 0.0) {
        return Err(mimo_ee_core::Error::Domain { what: "transmit power P", value: p }.into());
    }
    let n = settings.n;
    let n_u = settings.n_u;
    let m = cfg.m as usize;
    let occ = occupied_bins(n, n_u);
    let p_k = n as f64 * p / n_u as f64;
    let amp = p_k.sqrt();

    let mut fft = OrthoFft::new(n);
    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let ch_scale = (cfg.beta * 0.5).sqrt();

    let mut h = vec![Complex64::new(0.0, 0.0); m * n_u];
    let mut norm = vec![0.0f64; n_u];
    let mut s = vec![Complex64::new(0.0, 0.0); n_u];
    let mut r = vec![Complex64::new(0.0, 0.0); n_u];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];

    let mut t_z = 0.0f64;
    let mut t_rz = Complex64::new(0.0, 0.0);
    let mut t_r = 0.0f64;

    for _ in 0..settings.n_symbols {
        for sym in s.iter_mut() {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            *sym = Complex64::new(theta.cos(), theta.sin());
        }
        for a in 0..m {
            for j in 0..n_u {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                h[a * n_u + j] = Complex64::new(re * ch_scale, im * ch_scale);
            }
        }
        for j in 0..n_u {
            let mut acc = 0.0;
            for a in 0..m {
                acc += h[a * n_u + j].norm_sqr();
            }
            norm[j] = acc.sqrt();
        }
        r.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));

        for a in 0..m {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (j, &bin) in occ.iter().enumerate() {
                let w = h[a * n_u + j].conj() / norm[j] * amp;
                buf[bin] = w * s[j];
            }
            fft.inverse(&mut buf);
            for v in buf.iter_mut() {
                *v = soft_limiter(*v, cfg.p_max);
            }
            fft.forward(&mut buf);
            for (j, &bin) in occ.iter().enumerate() {
                r[j] += h[a * n_u + j] * buf[bin];
            }
        }

        for j in 0..n_u {
            let z = s[j] * (norm[j] * amp);
            t_z += z.norm_sqr();
            t_rz += r[j] * z.conj();
            t_r += r[j].norm_sqr();
        }
    }

    let denom = (n * settings.n_symbols) as f64;
    let s_hat = t_rz.norm_sqr() / t_z / denom;
    let d_hat = (t_r - t_rz.norm_sqr() / t_z) / denom;
    let gamma_hat = s_hat / (cfg.sigma2 + d_hat);
    Ok((s_hat, d_hat, gamma_hat))
}

/// Measures the fraction of clipping-distortion power falling on the occupied
/// subcarriers of an oversampled SISO OFDM waveform clipped at back-off
/// `psi`. The Bussgang residual is taken against a single least-squares gain
/// fitted globally over the whole run.
///
/// Rejects oversampling < 4 (the out-of-band spectrum would be unobservable)
/// and reports `InsufficientDistortion` when the residual carries less than
/// 1e-9 of the signal energy (back-off so large that nothing clips).
pub fn inband_fraction(psi: f64, settings: &McSettings) -> Result<f64, AppError> {
    if !(psi > 0.0) {
        return Err(mimo_ee_core::Error::Domain { what: "back-off psi", value: psi }.into());
    }
    settings.validate()?;
    if settings.oversampling < 4 {
        return Err(invariant("inband_fraction requires oversampling >= 4"));
    }
    let n = settings.n;
    let n_u = settings.n_u;
    let occ = occupied_bins(n, n_u);
    // unit per-bin power => mean time-sample power n_u/n; clip so the
    // sample-level back-off is exactly psi
    let clip_power = psi * n_u as f64 / n as f64;

    let mut fft = OrthoFft::new(n);
    let mut x_freq = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut xc = vec![Complex64::new(0.0, 0.0); n];

    // pass 1: global least-squares gain over every sample of the run
    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    for _ in 0..settings.n_symbols {
        x_freq.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &bin in &occ {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            x_freq[bin] = Complex64::new(theta.cos(), theta.sin());
        }
        x.copy_from_slice(&x_freq);
        fft.inverse(&mut x);
        for t in 0..n {
            xc[t] = soft_limiter(x[t], clip_power);
            num += x[t].conj() * xc[t];
            den += x[t].norm_sqr();
        }
    }
    let a_hat = num / den;

    // pass 2: same stream, accumulate the spectral residual D = FFT(xc) - a X
    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let mut d_occ = 0.0f64;
    let mut d_tot = 0.0f64;
    for _ in 0..settings.n_symbols {
        x_freq.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &bin in &occ {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            x_freq[bin] = Complex64::new(theta.cos(), theta.sin());
        }
        x.copy_from_slice(&x_freq);
        fft.inverse(&mut x);
        for t in 0..n {
            xc[t] = soft_limiter(x[t], clip_power);
        }
        fft.forward(&mut xc);
        for k in 0..n {
            let d = xc[k] - a_hat * x_freq[k];
            let pw = d.norm_sqr();
            d_tot += pw;
        }
        for &bin in &occ {
            let d = xc[bin] - a_hat * x_freq[bin];
            d_occ += d.norm_sqr();
        }
    }

    let energy_ratio = d_tot / den;
    if energy_ratio < 1e-9 {
        return Err(AppError::InsufficientDistortion { energy_ratio });
    }
    Ok(d_occ / d_tot)
}

/// Kurtosis of the real part of the pre-clipping time-domain OFDM samples —
/// 3.0 for a Gaussian. Validates the complex-Gaussian modeling premise the
/// scalar oracle rests on.
pub fn time_domain_kurtosis(settings: &McSettings) -> Result<f64, AppError> {
    settings.validate()?;
    let n = settings.n;
    let occ = occupied_bins(n, settings.n_u);
    let mut fft = OrthoFft::new(n);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut rng = ChaCha12Rng::seed_from_u64(settings.seed);
    let mut m2 = 0.0f64;
    let mut m4 = 0.0f64;
    let mut count = 0u64;
    for _ in 0..settings.n_symbols {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &bin in &occ {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            x[bin] = Complex64::new(theta.cos(), theta.sin());
        }
        fft.inverse(&mut x);
        for v in &x {
            let re2 = v.re * v.re;
            m2 += re2;
            m4 += re2 * re2;
            count += 1;
        }
    }
    let m2 = m2 / count as f64;
    let m4 = m4 / count as f64;
    Ok(m4 / (m2 * m2))
}
