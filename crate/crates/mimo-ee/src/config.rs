//! Sweep configuration: a flat `key = value` file with `#` comments.
//!
//! Every key is optional; omitted keys take the Table-I defaults, so an
//! empty file describes the full reference sweep. Unknown keys are an
//! error (catching typos beats silently ignoring them). Lists are
//! comma-separated. The grammar is documented in the README.

use std::fs;
use std::path::Path;

use mimo_ee_core::{OptimizerSettings, PaArchitecture, SystemConfig};

use crate::error::AppError;

/// Inclusive path-loss sweep range in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossRange {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

/// Everything a sweep needs: the path-loss grid, the antenna/architecture
/// lists, the per-link template (m and beta get filled per triple), and
/// optimizer overrides. `None` overrides defer to the per-config defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub pathloss_db: PathlossRange,
    pub m_list: Vec<u32>,
    pub arch_list: Vec<PaArchitecture>,
    pub n_u: u32,
    pub delta_f_hz: f64,
    pub eta: f64,
    /// Noise power override [W]; `None` derives thermal noise over the
    /// occupied band from (n_u, delta_f_hz).
    pub sigma2_w: Option<f64>,
    pub p_const_w: f64,
    pub p_sprf_w: f64,
    pub p_max_w: f64,
    /// Optimizer seed power override [W].
    pub p_test_w: Option<f64>,
    /// Bisection width override [W].
    pub delta_w: Option<f64>,
    pub max_expansions: u32,
    pub include_baseline: bool,
    pub baseline_ibo_db: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            pathloss_db: PathlossRange { start_db: 60.0, stop_db: 150.0, step_db: 5.0 },
            m_list: vec![4, 32],
            arch_list: vec![PaArchitecture::ClassB, PaArchitecture::Perfect],
            n_u: 1200,
            delta_f_hz: 15e3,
            eta: 2.0 / 3.0,
            sigma2_w: None,
            p_const_w: 348.0,
            p_sprf_w: 23.0,
            p_max_w: 160.0,
            p_test_w: None,
            delta_w: None,
            max_expansions: 200,
            include_baseline: true,
            baseline_ibo_db: 6.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), AppError> {
        let r = &self.pathloss_db;
        if !(r.start_db < r.stop_db) {
            return Err(invariant("pathloss range: start < stop"));
        }
        if !(r.step_db > 0.0) {
            return Err(invariant("pathloss range: step > 0"));
        }
        if self.m_list.is_empty() {
            return Err(invariant("m_list nonempty"));
        }
        if self.arch_list.is_empty() {
            return Err(invariant("arch_list nonempty"));
        }
        if self.m_list.contains(&0) {
            return Err(invariant("antenna counts >= 1"));
        }
        // template sanity; the full check runs per-config in build_config
        if !(self.p_max_w > 0.0) {
            return Err(invariant("p_max_w > 0"));
        }
        if let Some(d) = self.delta_w {
            if !(d > 0.0) {
                return Err(invariant("delta_w > 0"));
            }
        }
        if let Some(p) = self.p_test_w {
            if !(p > 0.0) {
                return Err(invariant("p_test_w > 0"));
            }
        }
        if self.max_expansions == 0 {
            return Err(invariant("max_expansions >= 1"));
        }
        Ok(())
    }

    /// Path-loss grid, inclusive of `stop_db` when it lies on the step
    /// lattice (integer stepping, so 60..150 by 5 has exactly 19 points).
    pub fn pathlosses(&self) -> Vec<f64> {
        let r = &self.pathloss_db;
        let steps = ((r.stop_db - r.start_db) / r.step_db + 1e-9).floor() as usize;
        (0..=steps).map(|i| r.start_db + i as f64 * r.step_db).collect()
    }

    /// Materializes the link config for one sweep triple.
    pub fn build_config(&self, m: u32, pathloss_db: f64, arch: PaArchitecture) -> SystemConfig {
        let beta = 10f64.powf(-pathloss_db / 10.0);
        let sigma2 = self
            .sigma2_w
            .unwrap_or_else(|| SystemConfig::noise_power(self.n_u, self.delta_f_hz));
        SystemConfig {
            n_u: self.n_u,
            delta_f: self.delta_f_hz,
            eta: self.eta,
            sigma2,
            p_const: self.p_const_w,
            p_sprf: self.p_sprf_w,
            p_max: self.p_max_w,
            m,
            beta,
            arch,
        }
    }

    /// Optimizer settings for one config, with file overrides applied.
    pub fn optimizer_settings(&self, cfg: &SystemConfig) -> OptimizerSettings {
        let mut s = OptimizerSettings::for_config(cfg);
        if let Some(p) = self.p_test_w {
            s.p_test = p;
        }
        if let Some(d) = self.delta_w {
            s.delta = d;
        }
        s.max_expansions = self.max_expansions;
        s
    }
}

fn invariant(what: &str) -> AppError {
    AppError::Validation { invariant: what.to_string() }
}

fn parse_err(line: usize, msg: impl Into<String>) -> AppError {
    AppError::Parse { line, msg: msg.into() }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, AppError> {
    v.parse::<f64>()
        .map_err(|_| parse_err(line, format!("{key}: expected a number, got `{v}`")))
}

fn parse_u32(line: usize, key: &str, v: &str) -> Result<u32, AppError> {
    v.parse::<u32>()
        .map_err(|_| parse_err(line, format!("{key}: expected a nonnegative integer, got `{v}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, AppError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_err(line, format!("{key}: expected true or false, got `{v}`"))),
    }
}

/// Architecture from its CLI/CSV token; `None` for anything unrecognized.
pub fn arch_from_token(v: &str) -> Option<PaArchitecture> {
    match v.to_ascii_lowercase().as_str() {
        "classb" | "class_b" | "class-b" => Some(PaArchitecture::ClassB),
        "perfect" => Some(PaArchitecture::Perfect),
        _ => None,
    }
}

/// Canonical token for an architecture, as written to CSV and accepted by
/// `--pa`.
pub fn arch_token(arch: PaArchitecture) -> &'static str {
    match arch {
        PaArchitecture::ClassB => "classb",
        PaArchitecture::Perfect => "perfect",
    }
}

fn parse_arch(line: usize, v: &str) -> Result<PaArchitecture, AppError> {
    arch_from_token(v)
        .ok_or_else(|| parse_err(line, format!("arch_list: unknown architecture `{v}`")))
}

/// Parses the flat key-value document. Later assignments win; the result is
/// validated before being returned.
pub fn parse_config(text: &str) -> Result<SweepSpec, AppError> {
    let mut spec = SweepSpec::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(parse_err(line, format!("{key}: empty value")));
        }
        match key {
            "pathloss_db_start" => spec.pathloss_db.start_db = parse_f64(line, key, value)?,
            "pathloss_db_stop" => spec.pathloss_db.stop_db = parse_f64(line, key, value)?,
            "pathloss_db_step" => spec.pathloss_db.step_db = parse_f64(line, key, value)?,
            "m_list" => {
                spec.m_list = value
                    .split(',')
                    .map(|t| parse_u32(line, key, t.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "arch_list" => {
                spec.arch_list = value
                    .split(',')
                    .map(|t| parse_arch(line, t.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "n_u" => spec.n_u = parse_u32(line, key, value)?,
            "delta_f_hz" => spec.delta_f_hz = parse_f64(line, key, value)?,
            "eta" => spec.eta = parse_f64(line, key, value)?,
            "sigma2_w" => spec.sigma2_w = Some(parse_f64(line, key, value)?),
            "p_const_w" => spec.p_const_w = parse_f64(line, key, value)?,
            "p_sprf_w" => spec.p_sprf_w = parse_f64(line, key, value)?,
            "p_max_w" => spec.p_max_w = parse_f64(line, key, value)?,
            "p_test_w" => spec.p_test_w = Some(parse_f64(line, key, value)?),
            "delta_w" => spec.delta_w = Some(parse_f64(line, key, value)?),
            "max_expansions" => spec.max_expansions = parse_u32(line, key, value)?,
            "include_baseline" => spec.include_baseline = parse_bool(line, key, value)?,
            "baseline_ibo_db" => spec.baseline_ibo_db = parse_f64(line, key, value)?,
            _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<SweepSpec, AppError> {
    let text = fs::read_to_string(path).map_err(AppError::Io)?;
    parse_config(&text)
}
