//! Checks a hand-written drive against the gate conditions.
//!
//! cargo run --release --example constraint_check

use squeezegate::drive::robust_drive;
use squeezegate::{constraint_residuals, QuadratureConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let cfg = QuadratureConfig::default();
    for (a, s) in [(0.3608, 0.7820), (0.36083045, 0.78204779), (0.40, 0.70)] {
        let spec = robust_drive(1.0, a, s)?;
        let report = spec.validate_spectral_family();
        let res = constraint_residuals(&spec, TARGET_PHASE, &cfg)?;
        println!("a = {a:<10} s = {s:<10} linear constraints hold: {}", report.all_hold());
        for (name, value) in res.as_array() {
            println!("  {name} {value:+.3e}");
        }
    }
    Ok(())
}
