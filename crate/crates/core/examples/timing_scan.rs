//! Fidelity against a relative gate-time error, written as CSV to stdout.
//!
//! cargo run --release --example timing_scan > timing.csv

use squeezegate::designer::design_profile;
use squeezegate::{scan, ErrorAxis, Method, Profile, QuadratureConfig, ScanSettings, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let design = design_profile(Profile::Robust, 1.0, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
    let table = scan(&design, ErrorAxis::Timing, (-0.05, 0.05), 21, Method::ClosedForm, &ScanSettings::default())?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
