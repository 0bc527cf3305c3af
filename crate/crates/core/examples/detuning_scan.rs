//! Fidelity against motional detuning, which only the Fock-space propagator
//! can evaluate.
//!
//! cargo run --release --example detuning_scan

use squeezegate::designer::design_profile;
use squeezegate::{scan, ErrorAxis, Method, Profile, QuadratureConfig, ScanSettings, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let settings = ScanSettings::default();
    for kind in [Profile::Ms, Profile::Robust] {
        let design = design_profile(kind, 1.0, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
        let table = scan(&design, ErrorAxis::Detuning, (-0.04, 0.04), 9, Method::Oracle, &settings)?;
        let row: Vec<String> = table.rows.iter().map(|r| format!("{:+.2}:{:.5}", r.error_value, r.fidelity)).collect();
        println!("{kind:>7} {}", row.join(" "));
    }
    Ok(())
}
