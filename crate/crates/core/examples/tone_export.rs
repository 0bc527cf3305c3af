//! Converts the robust drive into a list of laser tones.
//!
//! cargo run --release --example tone_export

use squeezegate::designer::design_profile;
use squeezegate::{export_tones, Profile, QuadratureConfig, RealizationParams, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let xi = 2.0 * std::f64::consts::PI * 20e3;
    let design = design_profile(Profile::Robust, xi, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
    let realization = RealizationParams {
        eta: 0.144,
        nu: 3.0e6,
        omega0_label: Some("729 nm".into()),
    };
    let list = export_tones(&design, &realization)?;
    println!("{:>5} {:>14} {:>12} {:>16}", "order", "offset/xi", "amplitude", "from carrier Hz");
    for t in &list.tones {
        println!(
            "{:>5} {:>14.3} {:>12.6} {:>16.1}",
            t.sideband_order,
            t.offset_from_sideband / xi,
            t.amplitude,
            t.detuning_from_carrier_hz
        );
    }
    let tau = 1.234;
    println!("w1 reconstruction error at tau = {tau}: {:.2e}", (list.w1_at(tau) - design.spec.w1_at(tau)).norm());
    Ok(())
}
