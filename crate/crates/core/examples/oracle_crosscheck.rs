//! Compares the closed-form fidelity with direct Fock-space propagation and
//! shows how truncation limits the propagator for squeezed states.
//!
//! cargo run --release --example oracle_crosscheck

use squeezegate::designer::design_profile;
use squeezegate::{closed_form_fidelity, numeric_fidelity, ErrorModel, FockConfig, Profile, QuadratureConfig, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let cfg = QuadratureConfig::default();
    let design = design_profile(Profile::Robust, 1.0, TARGET_PHASE, &SolverConfig::default(), &cfg)?;
    for delta in [0.0, 0.03, -0.06] {
        let err = ErrorModel::rabi(delta);
        let closed = closed_form_fidelity(&design, &err, &cfg)?.fidelity;
        let oracle = numeric_fidelity(&design, &err, &FockConfig::default(), 0)?.fidelity;
        println!("rabi {delta:+.2}: closed {closed:.10} oracle {oracle:.10}");
    }
    for n_max in [40, 60, 80, 120] {
        let fock = FockConfig {
            n_max,
            ..FockConfig::default()
        };
        match numeric_fidelity(&design, &ErrorModel::default(), &fock, 0) {
            Ok(r) => println!("n_max {n_max:>3}: F = {:.10}", r.fidelity),
            Err(e) => println!("n_max {n_max:>3}: {e}"),
        }
    }
    Ok(())
}
