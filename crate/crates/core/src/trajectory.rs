//! Phase-space trajectories of the two spin branches.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::designer::GateDesign;
use crate::error::{Error, Result};
use crate::functionals::{phase_functionals_many, quadrature_widths};
use crate::quadrature::QuadratureConfig;

/// State of the oscillator on both branches at time `t` (seconds).
///
/// `delta_x` and `delta_p` are the `m = +1` standard deviations of
/// `(a + a†)/2` and `(a - a†)/2i`, `(e^{-r}/2, e^r/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub r: f64,
    pub delta_x: f64,
    pub delta_p: f64,
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "t,re_alpha_p,im_alpha_p,re_alpha_m,im_alpha_m,re_gamma_p,im_gamma_p,re_gamma_m,im_gamma_m,r,delta_x,delta_p";

/// Samples the gate on `n_points` equally spaced times covering `[0, T]`.
pub fn compute_trajectory(design: &GateDesign, n_points: usize, cfg: &QuadratureConfig) -> Result<Vec<TrajectoryPoint>> {
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!("a trajectory needs at least 2 points, got {n_points}")));
    }
    let spec = &design.spec;
    let tau_end = std::f64::consts::TAU;
    let step = tau_end / (n_points - 1) as f64;
    let taus: Vec<f64> = (0..n_points)
        .map(|k| if k + 1 == n_points { tau_end } else { k as f64 * step })
        .collect();
    let pfs = phase_functionals_many(spec, &taus, cfg)?;
    Ok(pfs
        .iter()
        .map(|pf| {
            let (delta_x, delta_p) = quadrature_widths(spec, pf.tau);
            TrajectoryPoint {
                t: pf.tau / spec.xi,
                alpha_plus: pf.alpha_plus,
                alpha_minus: pf.alpha_minus,
                gamma_plus: pf.gamma_plus,
                gamma_minus: pf.gamma_minus,
                r: pf.r,
                delta_x,
                delta_p,
            }
        })
        .collect())
}

pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for p in points {
        let cols = [
            p.t,
            p.alpha_plus.re,
            p.alpha_plus.im,
            p.alpha_minus.re,
            p.alpha_minus.im,
            p.gamma_plus.re,
            p.gamma_plus.im,
            p.gamma_minus.re,
            p.gamma_minus.im,
            p.r,
            p.delta_x,
            p.delta_p,
        ];
        let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
