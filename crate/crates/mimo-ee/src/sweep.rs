//! Path-loss sweeps and their CSV contract.
//!
//! A sweep walks (arch, M, pathloss) triples in the order the spec lists
//! them, optimizes each link, optionally evaluates the fixed-IBO baseline,
//! and collects rows. Failing triples do not abort the sweep; they land in
//! a failure list annotated with the triple.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mimo_ee_core::{
    baseline_fixed_ibo, energy_efficiency, find_stationary_power, linear_to_db, PaArchitecture,
};

use crate::config::{arch_from_token, arch_token, SweepSpec};
use crate::error::AppError;

/// One optimized operating point. Baseline fields are `None` when the sweep
/// ran with `include_baseline = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub pathloss_db: f64,
    pub m: u32,
    pub arch: PaArchitecture,
    pub p_opt_w: f64,
    pub ibo_opt_db: f64,
    pub ee_opt: f64,
    pub p_baseline_w: Option<f64>,
    pub ee_baseline: Option<f64>,
    /// 100 * (ee_opt / ee_baseline - 1).
    pub gain_percent: Option<f64>,
}

/// A triple the optimizer could not finish, with the error it raised.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub pathloss_db: f64,
    pub m: u32,
    pub arch: PaArchitecture,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// Runs the full sweep. Row order is (arch, M, pathloss), each in its
/// configured list order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome, AppError> {
    spec.validate()?;
    let pathlosses = spec.pathlosses();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &arch in &spec.arch_list {
        for &m in &spec.m_list {
            for &pl in &pathlosses {
                let cfg = spec.build_config(m, pl, arch);
                match sweep_one(spec, &cfg, pl) {
                    Ok(row) => rows.push(row),
                    Err(e) => failures.push(SweepFailure {
                        pathloss_db: pl,
                        m,
                        arch,
                        error: e.to_string(),
                    }),
                }
            }
        }
    }
    Ok(SweepOutcome { rows, failures })
}

fn sweep_one(
    spec: &SweepSpec,
    cfg: &mimo_ee_core::SystemConfig,
    pathloss_db: f64,
) -> Result<SweepRow, AppError> {
    let settings = spec.optimizer_settings(cfg);
    let sol = find_stationary_power(cfg, &settings)?;
    let p_opt = sol.point.p;
    let ibo_opt_db = linear_to_db(cfg.m as f64 * cfg.p_max / p_opt)?;
    let (p_baseline_w, ee_baseline, gain_percent) = if spec.include_baseline {
        let p_b = baseline_fixed_ibo(cfg, spec.baseline_ibo_db);
        let ee_b = energy_efficiency(cfg, p_b)?;
        (Some(p_b), Some(ee_b), Some(100.0 * (sol.point.ee / ee_b - 1.0)))
    } else {
        (None, None, None)
    };
    Ok(SweepRow {
        pathloss_db,
        m: cfg.m,
        arch: cfg.arch,
        p_opt_w: p_opt,
        ibo_opt_db,
        ee_opt: sol.point.ee,
        p_baseline_w,
        ee_baseline,
        gain_percent,
    })
}

/// Byte-exact CSV header contract.
pub const CSV_HEADER: &str =
    "pathloss_dB,M,arch,P_opt_W,ibo_opt_dB,EE_opt_bit_per_J,P_baseline_W,EE_baseline_bit_per_J,gain_percent";

fn push_real(out: &mut String, v: f64) {
    // 17 significant digits: round-trips every finite f64
    write!(out, "{v:.16e}").expect("write to String");
}

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        push_real(out, v);
    }
}

/// Renders rows under the header contract; every real is written with 17
/// significant digits so parsing reproduces the rows bit-exactly. `None`
/// baseline fields become empty cells.
pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        push_real(&mut out, row.pathloss_db);
        out.push(',');
        write!(out, "{}", row.m).expect("write to String");
        out.push(',');
        out.push_str(arch_token(row.arch));
        out.push(',');
        push_real(&mut out, row.p_opt_w);
        out.push(',');
        push_real(&mut out, row.ibo_opt_db);
        out.push(',');
        push_real(&mut out, row.ee_opt);
        out.push(',');
        push_opt(&mut out, row.p_baseline_w);
        out.push(',');
        push_opt(&mut out, row.ee_baseline);
        out.push(',');
        push_opt(&mut out, row.gain_percent);
        out.push('\n');
    }
    out
}

/// Writes the rendered CSV to a file.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), AppError> {
    if rows.is_empty() {
        return Err(AppError::Validation { invariant: "emit_csv: rows nonempty".into() });
    }
    fs::write(path, render_csv(rows)).map_err(AppError::Io)
}

fn field_f64(line: usize, name: &str, token: &str) -> Result<f64, AppError> {
    token.parse::<f64>().map_err(|_| AppError::Parse {
        line,
        msg: format!("{name}: expected a number, got `{token}`"),
    })
}

fn field_opt(line: usize, name: &str, token: &str) -> Result<Option<f64>, AppError> {
    if token.is_empty() {
        Ok(None)
    } else {
        field_f64(line, name, token).map(Some)
    }
}

/// Parses CSV text produced by [`render_csv`]; the inverse of emission.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, AppError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(AppError::Parse { line: 1, msg: format!("bad header `{header}`") })
        }
        None => return Err(AppError::Parse { line: 1, msg: "empty document".into() }),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 9 {
            return Err(AppError::Parse {
                line,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let arch = arch_from_token(fields[2]).ok_or_else(|| AppError::Parse {
            line,
            msg: format!("arch: unknown token `{}`", fields[2]),
        })?;
        rows.push(SweepRow {
            pathloss_db: field_f64(line, "pathloss_dB", fields[0])?,
            m: fields[1].parse().map_err(|_| AppError::Parse {
                line,
                msg: format!("M: expected an integer, got `{}`", fields[1]),
            })?,
            arch,
            p_opt_w: field_f64(line, "P_opt_W", fields[3])?,
            ibo_opt_db: field_f64(line, "ibo_opt_dB", fields[4])?,
            ee_opt: field_f64(line, "EE_opt_bit_per_J", fields[5])?,
            p_baseline_w: field_opt(line, "P_baseline_W", fields[6])?,
            ee_baseline: field_opt(line, "EE_baseline_bit_per_J", fields[7])?,
            gain_percent: field_opt(line, "gain_percent", fields[8])?,
        });
    }
    Ok(rows)
}
