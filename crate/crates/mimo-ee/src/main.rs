//! `mimo-ee`: energy-efficiency optimizer and Monte-Carlo validator for a
//! clipped massive-MIMO OFDM downlink.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimo_ee::config::{arch_from_token, arch_token, load_config, SweepSpec};
use mimo_ee::error::AppError;
use mimo_ee::mc::McSettings;
use mimo_ee::sweep::{emit_csv, render_csv, run_sweep};
use mimo_ee::validate::{run_validation, ValidationReport};
use mimo_ee_core::{
    asymptotic_probe, baseline_fixed_ibo, energy_efficiency, find_stationary_power, linear_to_db,
    GridSpec, PaArchitecture,
};

#[derive(Parser)]
#[command(
    name = "mimo-ee",
    about = "Energy-efficiency optimization for a clipped massive-MIMO OFDM downlink",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Single-link selection shared by `optimize` and `probe`.
#[derive(Args)]
struct LinkArgs {
    /// Path loss in dB; the channel variance is beta = 10^(-pathloss/10)
    #[arg(long = "pathloss-db", default_value_t = 90.0)]
    pathloss_db: f64,
    /// Number of base-station antennas M
    #[arg(long, default_value_t = 4)]
    antennas: u32,
    /// PA architecture
    #[arg(long, default_value = "classb", value_parser = parse_pa)]
    pa: PaArchitecture,
}

fn parse_pa(s: &str) -> Result<PaArchitecture, String> {
    arch_from_token(s).ok_or_else(|| format!("unknown PA architecture `{s}` (classb | perfect)"))
}

#[derive(Subcommand)]
enum Command {
    /// Find the EE-maximizing transmit power for one configuration
    Optimize {
        #[command(flatten)]
        link: LinkArgs,
        /// Sweep-spec file supplying the link template and optimizer knobs
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bisection termination width [W]
        #[arg(long)]
        delta: Option<f64>,
        /// Points in the multiplicity-scan grid (0 disables the scan)
        #[arg(long = "grid-points")]
        grid_points: Option<u32>,
        /// Also write the solution as machine-readable `key = value` lines
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize over a path-loss grid and emit CSV
    Sweep {
        /// Sweep-spec file; omitted keys take Table-I defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bisection termination width [W], overriding the spec
        #[arg(long)]
        delta: Option<f64>,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the closed forms against Monte-Carlo estimates
    Validate {
        /// PRNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Scalar-oracle sample count
        #[arg(long)]
        samples: Option<u64>,
        /// Back-off values for the scalar oracle
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 1.0, 4.0, 10.0])]
        psi: Vec<f64>,
        /// Skip the link-level simulator check
        #[arg(long)]
        skip_link: bool,
        /// Skip the in-band distortion fraction check
        #[arg(long)]
        skip_eta: bool,
    },
    /// Report the sign structure of f(P) at the search-range ends
    Probe {
        #[command(flatten)]
        link: LinkArgs,
        /// Sweep-spec file supplying the link template
        #[arg(long)]
        config: Option<PathBuf>,
        /// Points in the probe grid
        #[arg(long = "grid-points")]
        grid_points: Option<u32>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_spec(config: &Option<PathBuf>) -> Result<SweepSpec, AppError> {
    match config {
        Some(path) => load_config(path),
        None => Ok(SweepSpec::default()),
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::Optimize { link, config, delta, grid_points, out } => {
            let spec = load_spec(&config)?;
            let cfg = spec.build_config(link.antennas, link.pathloss_db, link.pa);
            let mut settings = spec.optimizer_settings(&cfg);
            if let Some(d) = delta {
                settings.delta = d;
            }
            if let Some(points) = grid_points {
                settings.oracle_grid = match points {
                    0 => None,
                    _ => Some(GridSpec { points, ..GridSpec::ORACLE_DEFAULT }),
                };
            }
            let sol = find_stationary_power(&cfg, &settings)?;
            let pt = &sol.point;
            let ibo_db = linear_to_db(cfg.m as f64 * cfg.p_max / pt.p)?;

            println!(
                "config: M = {}, pathloss = {} dB (beta = {:.3e}), PA = {}",
                cfg.m,
                link.pathloss_db,
                cfg.beta,
                arch_token(cfg.arch)
            );
            println!("P_opt   = {:.6} W  (IBO = {:.3} dB, psi = {:.4})", pt.p, ibo_db, pt.psi);
            println!("lambda  = {:.6}", pt.lambda);
            println!("gamma   = {:.4} ({:.2} dB)", pt.gamma, linear_to_db(pt.gamma)?);
            println!("rate    = {:.4} Mbit/s", pt.r / 1e6);
            println!("P_PA    = {:.4} W, P_total = {:.4} W", pt.p_pa, pt.p_tot);
            println!("EE      = {:.6} Mbit/J", pt.ee / 1e6);
            println!(
                "bracket = [{:.6e}, {:.6e}] W after {} bisection steps{}",
                sol.p_lower,
                sol.p_upper,
                sol.bisect_iters,
                if sol.flat { " (flat plateau)" } else { "" }
            );
            if spec.include_baseline {
                let p_b = baseline_fixed_ibo(&cfg, spec.baseline_ibo_db);
                let ee_b = energy_efficiency(&cfg, p_b)?;
                println!(
                    "baseline ({} dB IBO): P = {:.6} W, EE = {:.6} Mbit/J, gain = {:.2}%",
                    spec.baseline_ibo_db,
                    p_b,
                    ee_b / 1e6,
                    100.0 * (pt.ee / ee_b - 1.0)
                );
            }

            if let Some(path) = out {
                write_solution(&path, &cfg, link.pathloss_db, &sol, ibo_db)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, delta, out } => {
            let mut spec = load_spec(&config)?;
            if let Some(d) = delta {
                spec.delta_w = Some(d);
            }
            let outcome = run_sweep(&spec)?;
            for f in &outcome.failures {
                eprintln!(
                    "failed: pathloss = {} dB, M = {}, PA = {}: {}",
                    f.pathloss_db,
                    f.m,
                    arch_token(f.arch),
                    f.error
                );
            }
            match out {
                Some(path) => {
                    emit_csv(&outcome.rows, &path)?;
                    eprintln!("wrote {} rows to {}", outcome.rows.len(), path.display());
                }
                None => print!("{}", render_csv(&outcome.rows)),
            }
            if outcome.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} of {} triples failed", outcome.failures.len(),
                    outcome.failures.len() + outcome.rows.len());
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Validate { seed, samples, psi, skip_link, skip_eta } => {
            let mut settings = McSettings::default();
            if let Some(s) = seed {
                settings.seed = s;
            }
            if let Some(n) = samples {
                settings.n_samples = n;
            }
            let report = run_validation(&settings, &psi, !skip_link, !skip_eta)?;
            print_report(&report);
            if report.all_pass() {
                println!("validation: all {} checks passed", report.checks.len());
                Ok(ExitCode::SUCCESS)
            } else {
                let failed = report.checks.iter().filter(|c| !c.pass).count();
                println!("validation: {failed} of {} checks FAILED", report.checks.len());
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Probe { link, config, grid_points } => {
            let spec = load_spec(&config)?;
            let cfg = spec.build_config(link.antennas, link.pathloss_db, link.pa);
            let mut grid = GridSpec::PROBE_DEFAULT;
            if let Some(points) = grid_points {
                grid.points = points;
            }
            let rpt = asymptotic_probe(&cfg, &grid)?;
            println!(
                "config: M = {}, pathloss = {} dB, PA = {}",
                cfg.m,
                link.pathloss_db,
                arch_token(cfg.arch)
            );
            println!("f({:.1e} W) = {:+.6e}  (positive: EE still climbing)", grid.p_min, rpt.f_at_small_p);
            println!("f({:.1e} W) = {:+.6e}  (negative and vanishing: rate saturated)", grid.p_max, rpt.f_at_large_p);
            println!("gamma_0 = {:.6e}  (SNDR ceiling; C = {:.6e} W)", rpt.gamma0, rpt.c);
            println!("sign changes of f over {} grid points: {}", grid.points, rpt.sign_changes);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_report(report: &ValidationReport) {
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let rel = if c.reference != 0.0 {
            (c.measured - c.reference).abs() / c.reference.abs()
        } else {
            f64::NAN
        };
        let mut line = format!(
            "{verdict}  {:<38} measured {:.6e}  reference {:.6e}  rel {:.2e} (tol {:.1e})",
            c.name, c.measured, c.reference, rel, c.tolerance_rel
        );
        if let Some(se) = c.stderr {
            write!(line, "  stderr {se:.1e}").expect("write to String");
        }
        println!("{line}");
    }
}

fn write_solution(
    path: &Path,
    cfg: &mimo_ee_core::SystemConfig,
    pathloss_db: f64,
    sol: &mimo_ee_core::StationarySolution,
    ibo_db: f64,
) -> Result<(), AppError> {
    fn kv(out: &mut String, k: &str, v: f64) {
        writeln!(out, "{k} = {v:.16e}").expect("write to String");
    }
    let pt = &sol.point;
    let mut out = String::new();
    kv(&mut out, "pathloss_db", pathloss_db);
    writeln!(out, "m = {}", cfg.m).expect("write to String");
    writeln!(out, "arch = {}", arch_token(cfg.arch)).expect("write to String");
    kv(&mut out, "p_opt_w", pt.p);
    kv(&mut out, "ibo_opt_db", ibo_db);
    kv(&mut out, "psi", pt.psi);
    kv(&mut out, "lambda", pt.lambda);
    kv(&mut out, "gamma", pt.gamma);
    kv(&mut out, "rate_bit_per_s", pt.r);
    kv(&mut out, "p_pa_w", pt.p_pa);
    kv(&mut out, "p_total_w", pt.p_tot);
    kv(&mut out, "ee_bit_per_j", pt.ee);
    kv(&mut out, "bracket_lower_w", sol.p_lower);
    kv(&mut out, "bracket_upper_w", sol.p_upper);
    writeln!(out, "bisect_iters = {}", sol.bisect_iters).expect("write to String");
    std::fs::write(path, out).map_err(AppError::Io)
}
