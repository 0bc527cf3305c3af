//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 for numerical
//! failures (including residuals above tolerance in `verify`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::designer::{design_profile, rabi_estimate, GateDesign, SolverConfig};
use crate::drive::{DriveSpec, ErrorModel, Profile};
use crate::error::{Error, Result};
use crate::fidelity::{closed_form_fidelity, scan, ErrorAxis, Method, ScanSettings};
use crate::functionals::{constraint_residuals, TARGET_PHASE};
use crate::oracle::{convergence_report, FockConfig};
use crate::quadrature::QuadratureConfig;
use crate::tones::{export_tones, RealizationParams};
use crate::trajectory::{compute_trajectory, write_trajectory_csv};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "SQUEEZEGATE_THREADS";

/// Default `verify` thresholds for C1..C6.
pub const VERIFY_TOLERANCES: [f64; 6] = [1e-8, 1e-8, 1e-8, 1e-8, 1e-6, 1e-4];

#[derive(Debug, Parser)]
#[command(name = "squeezegate", version, about = "Design and verify squeezing-assisted robust two-qubit gates")]
struct Cli {
    /// Worker threads for scans and oracle runs (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for a gate and write it as JSON.
    Design(DesignArgs),
    /// Print the six constraint residuals of a design.
    Verify(VerifyArgs),
    /// Fidelity along one error axis, as CSV.
    Scan(ScanArgs),
    /// Phase-space trajectory of both branches, as CSV.
    Trajectory(TrajectoryArgs),
    /// Sideband tone list, as JSON.
    Tones(TonesArgs),
    /// Drive-strength requirement relative to a single-tone gate.
    Power(PowerArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    profile: Profile,
    /// Gate rate ξ = 2π/T in rad/s.
    #[arg(long)]
    xi: f64,
    #[arg(long, default_value_t = TARGET_PHASE, allow_hyphen_values = true)]
    phase: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    design: PathBuf,
    /// Also run the Fock-space propagation and its convergence checks.
    #[arg(long)]
    deep: bool,
    /// Single threshold applied to all six residuals.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    design: PathBuf,
    #[arg(long = "error")]
    axis: ErrorAxis,
    /// Relative error range `lo:hi` (δν/ξ for detuning).
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    #[arg(long)]
    points: usize,
    #[arg(long, default_value = "closed")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
    /// Fock truncation for the oracle.
    #[arg(long)]
    n_max: Option<usize>,
    /// Time steps per gate period for the oracle.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    design: PathBuf,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TonesArgs {
    design: PathBuf,
    #[arg(long)]
    eta: f64,
    /// Motional frequency in Hz.
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    omega0: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PowerArgs {
    design: PathBuf,
    #[arg(long)]
    eta: f64,
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = match cli.threads {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse() {
                Ok(n) => n,
                Err(_) => {
                    eprintln!("error: {THREADS_ENV} must be a non-negative integer, got {v:?}");
                    return 1;
                }
            },
            Err(_) => 0,
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// Reads a design file; a bare drive description is accepted with the
/// default target phase.
pub fn load_design(path: &Path) -> Result<GateDesign> {
    let text = std::fs::read_to_string(path)?;
    let design = match serde_json::from_str::<GateDesign>(&text) {
        Ok(d) => d,
        Err(e) => match serde_json::from_str::<DriveSpec>(&text) {
            Ok(spec) => GateDesign::unrefined(spec, TARGET_PHASE),
            Err(_) => return Err(e.into()),
        },
    };
    design.spec.validate()?;
    if !design.target_phase.is_finite() {
        return Err(Error::InvalidArgument("target_phase must be finite".into()));
    }
    Ok(design)
}

pub fn save_design(design: &GateDesign, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, design)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidArgument(format!("range must look like lo:hi, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn dispatch(command: Command) -> Result<i32> {
    let cfg = QuadratureConfig::default();
    match command {
        Command::Design(args) => {
            if !(args.xi > 0.0 && args.xi.is_finite()) {
                return Err(Error::InvalidArgument(format!("--xi must be positive, got {}", args.xi)));
            }
            let design = design_profile(args.profile, args.xi, args.phase, &SolverConfig::default(), &cfg)?;
            save_design(&design, &args.out)?;
            if let Some([a, s]) = design.refined {
                println!("refined a = {a:.16e} xi, s = {s:.16e} ({} iterations)", design.iterations);
            }
            Ok(0)
        }
        Command::Verify(args) => verify(&args, &cfg),
        Command::Scan(args) => {
            let design = load_design(&args.design)?;
            let range = parse_range(&args.range)?;
            let mut fock = FockConfig::default();
            if let Some(n) = args.n_max {
                fock.n_max = n;
            }
            if let Some(s) = args.steps {
                fock.steps_per_period = s;
            }
            let settings = ScanSettings { quadrature: cfg, fock };
            let table = scan(&design, args.axis, range, args.points, args.method, &settings)?;
            let mut out = BufWriter::new(File::create(&args.out)?);
            table.write_csv(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Trajectory(args) => {
            let design = load_design(&args.design)?;
            let points = compute_trajectory(&design, args.points, &cfg)?;
            let mut out = BufWriter::new(File::create(&args.out)?);
            write_trajectory_csv(&points, &mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Tones(args) => {
            let design = load_design(&args.design)?;
            let realization = RealizationParams {
                eta: args.eta,
                nu: args.nu,
                omega0_label: args.omega0,
            };
            let list = export_tones(&design, &realization)?;
            let mut out = BufWriter::new(File::create(&args.out)?);
            serde_json::to_writer_pretty(&mut out, &list)?;
            writeln!(out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Power(args) => {
            let design = load_design(&args.design)?;
            let est = rabi_estimate(&design, args.eta)?;
            println!("eta {:.16e}", est.eta);
            println!("omega_first {:.16e}", est.omega_first);
            println!("omega_second {:.16e}", est.omega_second);
            println!("omega_over_xi {:.16e}", est.omega_over_xi());
            println!("omega_rad_per_s {:.16e}", est.omega_over_xi() * design.spec.xi);
            println!("ratio_to_ms {:.16e}", est.ratio_to_ms);
            Ok(0)
        }
    }
}

fn verify(args: &VerifyArgs, cfg: &QuadratureConfig) -> Result<i32> {
    let design = load_design(&args.design)?;
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("--tol must be positive, got {t}")));
        }
    }
    let residuals = constraint_residuals(&design.spec, design.target_phase, cfg)?;
    let mut ok = true;
    for ((name, value), default) in residuals.as_array().into_iter().zip(VERIFY_TOLERANCES) {
        let tol = args.tol.unwrap_or(default);
        let pass = value < tol;
        ok &= pass;
        println!("{name} {value:.16e} {}", if pass { "ok" } else { "FAIL" });
    }
    let closed = closed_form_fidelity(&design, &ErrorModel::default(), cfg)?;
    println!("fidelity_closed {:.16e}", closed.fidelity);
    if args.deep {
        let report = convergence_report(&design, &ErrorModel::default(), &FockConfig::default());
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.16e}"));
        println!("fidelity_oracle {}", show(report.fidelity));
        println!("delta_steps_doubled {}", show(report.delta_steps));
        println!("delta_nmax_increased {}", show(report.delta_nmax));
        println!("truncation_tail_flag {}", report.tail_flag);
        for f in &report.failures {
            eprintln!("oracle: {f}");
        }
        ok &= report.converged;
        println!("oracle_converged {}", report.converged);
    }
    Ok(if ok { 0 } else { 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-0.1:0.1").unwrap(), (-0.1, 0.1));
        assert_eq!(parse_range("0:0").unwrap(), (0.0, 0.0));
        assert!(parse_range("0.1").is_err());
        assert!(parse_range("0.2:0.1").is_err());
        assert!(parse_range("a:b").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["squeezegate", "frobnicate"]), 1);
        assert_eq!(run(["squeezegate", "design", "--profile", "bogus", "--xi", "1", "--out", "x"]), 1);
        assert_eq!(run(["squeezegate", "verify", "/nonexistent/design.json"]), 1);
        assert_eq!(run(["squeezegate", "--help"]), 0);
    }
}
