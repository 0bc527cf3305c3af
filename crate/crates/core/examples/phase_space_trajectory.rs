//! Branch displacements and squeezing along the robust gate, as CSV.
//!
//! cargo run --release --example phase_space_trajectory > trajectory.csv

use squeezegate::designer::design_profile;
use squeezegate::trajectory::write_trajectory_csv;
use squeezegate::{compute_trajectory, Profile, QuadratureConfig, SolverConfig, TARGET_PHASE};

fn main() -> squeezegate::Result<()> {
    let cfg = QuadratureConfig::default();
    let design = design_profile(Profile::Robust, 1.0, TARGET_PHASE, &SolverConfig::default(), &cfg)?;
    let points = compute_trajectory(&design, 257, &cfg)?;
    let r_max = points.iter().map(|p| p.r.abs()).fold(0.0, f64::max);
    let d_max = points.iter().map(|p| p.alpha_plus.norm()).fold(0.0, f64::max);
    eprintln!("max |r| = {r_max:.3}, max |alpha| = {d_max:.3}");
    write_trajectory_csv(&points, std::io::stdout().lock())?;
    Ok(())
}
