//! Designs the Rabi-robust squeezing gate and prints its constraint residuals.
//!
//! cargo run --release --example design_robust_gate

use squeezegate::designer::design_profile;
use squeezegate::{Profile, QuadratureConfig, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let xi = 2.0 * std::f64::consts::PI * 20e3;
    let design = design_profile(Profile::Robust, xi, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
    let [a, s] = design.refined.expect("robust designs are refined");
    println!("refined a = {a:.6}, s = {s:.6} after {} iterations", design.iterations);
    for h in &design.spec.odd_harmonics {
        println!("w1 harmonic {:>2}: {:+.6}", h.order, h.coeff);
    }
    for h in &design.spec.sine_harmonics {
        println!("r  harmonic {:>2}: {:+.6}", h.order, h.coeff);
    }
    for (name, value) in design.residuals.expect("residuals are stored").as_array() {
        println!("{name} {value:.3e}");
    }
    Ok(())
}
