//! Closed-form fidelity against a relative Rabi error, with the fitted
//! infidelity exponent.
//!
//! cargo run --release --example rabi_robustness_scan

use squeezegate::designer::design_profile;
use squeezegate::{scaling_exponent, scan, ErrorAxis, Method, Profile, QuadratureConfig, ScanSettings, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let settings = ScanSettings::default();
    for kind in [Profile::Ms, Profile::Robust] {
        let design = design_profile(kind, 1.0, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
        let table = scan(&design, ErrorAxis::Rabi, (-0.1, 0.1), 41, Method::ClosedForm, &settings)?;
        let slope = scaling_exponent(&table, (0.005, 0.05))?;
        let worst = table.rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
        println!("{kind:>7}: worst F over ±10% = {worst:.6}, log-log slope {slope:.2}");
    }
    Ok(())
}
