//! Peak carrier Rabi frequency each gate needs, relative to the single tone.
//!
//! cargo run --release --example power_budget

use squeezegate::designer::design_profile;
use squeezegate::{rabi_estimate, Profile, QuadratureConfig, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    for eta in [0.05, 0.1, 0.144] {
        for kind in [Profile::Ms, Profile::Minimal, Profile::Robust] {
            let design = design_profile(kind, 1.0, TARGET_PHASE, &SolverConfig::default(), &QuadratureConfig::default())?;
            let est = rabi_estimate(&design, eta)?;
            println!(
                "eta {eta:<5} {kind:>7}: w1 peak {:.3}, w2 peak {:.3}, Omega/xi {:.2}, ratio {:.2}",
                est.omega_first,
                est.omega_second,
                est.omega_over_xi(),
                est.ratio_to_ms
            );
        }
    }
    Ok(())
}
