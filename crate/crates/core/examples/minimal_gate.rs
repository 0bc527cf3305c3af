//! Compares the two-harmonic minimal gate with the single-tone reference.
//!
//! cargo run --release --example minimal_gate

use squeezegate::designer::design_profile;
use squeezegate::{closed_form_fidelity, ErrorModel, Profile, QuadratureConfig, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let cfg = QuadratureConfig::default();
    let solver = SolverConfig::default();
    for kind in [Profile::Ms, Profile::Minimal] {
        let design = design_profile(kind, 1.0, TARGET_PHASE, &solver, &cfg)?;
        let ideal = closed_form_fidelity(&design, &ErrorModel::default(), &cfg)?.fidelity;
        let off = closed_form_fidelity(&design, &ErrorModel::rabi(0.05), &cfg)?.fidelity;
        println!("{kind:>7}: F(0) = {ideal:.10}, F(+5% Rabi) = {off:.8}, amplitudes {:?}", design.refined);
    }
    Ok(())
}
