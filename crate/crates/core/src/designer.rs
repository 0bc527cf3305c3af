//! Amplitude design for the robust and minimal drives.
//!
//! The phase-setting constraint `Φ2 + Φ4 = φ` and the Rabi-robustness
//! constraint `∂_Ω(Φ2 + Φ4) = 0` leave two free amplitudes `(a, s)`. A sixth
//! order expansion of both gives polynomial equations with a closed-form
//! root, which seeds a line-search descent on the full expressions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::drive::{minimal_drive, ms_drive, robust_drive, DriveSpec, Profile, MINIMAL_A3, MINIMAL_S2};
use crate::error::{Error, Result};
use crate::functionals::{constraint_residuals, entangling_phase, rabi_sensitivity, ConstraintResiduals};
use crate::quadrature::QuadratureConfig;

/// A drive together with the phase it was designed for and how it was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDesign {
    #[serde(flatten)]
    pub spec: DriveSpec,
    pub target_phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    /// Starting amplitudes `(a, s)`, `a` in units of ξ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<ConstraintResiduals>,
    #[serde(default)]
    pub iterations: usize,
}

impl GateDesign {
    /// Wraps a drive without running the solver.
    pub fn unrefined(spec: DriveSpec, target_phase: f64) -> Self {
        GateDesign {
            spec,
            target_phase,
            profile: None,
            seed: None,
            refined: None,
            residuals: None,
            iterations: 0,
        }
    }
}

/// Line-search descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Required `|C5|` and `|C6|`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Finite-difference step for derivatives with respect to `(a, s)`.
    pub fd_step: f64,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: f64,
    pub direction: Direction,
}

/// Search direction of the descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Negative gradient of `C5² + C6²`.
    Steepest,
    /// Gauss–Newton step `-J⁻¹ (C5, C6)` from the finite-difference Jacobian.
    GaussNewton,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_iterations: 500,
            fd_step: 1e-5,
            armijo: 1e-4,
            direction: Direction::Steepest,
        }
    }
}

/// Root of the sixth-order expansions of the phase and robustness
/// constraints, in the canonical sign `a > 0, s > 0` (`a` in units of ξ).
pub fn solve_expanded(target_phase: f64) -> Result<(f64, f64)> {
    // 71582 x² + 70954 x - 75075 = 0 with x = s²
    let (qa, qb, qc): (f64, f64, f64) = (71582.0, 70954.0, -75075.0);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::Solver {
            iterations: 0,
            reason: "negative discriminant in the expanded robustness constraint".into(),
        });
    }
    let x = (-qb + disc.sqrt()) / (2.0 * qa);
    // 4π a² / 135135 · (71582 x² + 106431 x - 225225) = φ
    let bracket = 71582.0 * x * x + 106431.0 * x - 225225.0;
    let a2 = target_phase * 135135.0 / (4.0 * PI * bracket);
    if !(a2 > 0.0 && x > 0.0) {
        return Err(Error::Solver {
            iterations: 0,
            reason: format!("target phase {target_phase} has no real expanded solution"),
        });
    }
    Ok((a2.sqrt(), x.sqrt()))
}

/// Drive shape with free amplitudes used by the solver.
fn template_drive(template: Profile, xi: f64, a: f64, s: f64) -> Result<DriveSpec> {
    match template {
        Profile::Robust => robust_drive(xi, a, s),
        Profile::Minimal => minimal_drive(xi, a, s),
        Profile::Ms => Err(Error::InvalidArgument("the MS reference has no free squeezing amplitude".into())),
    }
}

struct Problem<'a> {
    template: Profile,
    target_phase: f64,
    cfg: &'a QuadratureConfig,
}

impl Problem<'_> {
    fn residual(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let spec = template_drive(self.template, 1.0, x[0], x[1])?;
        Ok([entangling_phase(&spec, TAU, self.cfg)? - self.target_phase, rabi_sensitivity(&spec, self.cfg)?])
    }
}

fn objective(r: [f64; 2]) -> f64 {
    r[0] * r[0] + r[1] * r[1]
}

/// Refines `seed = (a, s)` by a backtracking line-search descent on
/// `C5² + C6²` over the full (unexpanded) constraints.
pub fn refine_design(
    seed: (f64, f64),
    template: Profile,
    target_phase: f64,
    xi: f64,
    solver: &SolverConfig,
    cfg: &QuadratureConfig,
) -> Result<GateDesign> {
    let problem = Problem { template, target_phase, cfg };
    let h = solver.fd_step;
    let mut x = [seed.0, seed.1];
    let mut r = problem.residual(x)?;
    let mut f = objective(r);
    let mut iterations = 0;
    while r[0].abs() >= solver.tol || r[1].abs() >= solver.tol {
        if iterations == solver.max_iterations {
            return Err(Error::Solver {
                iterations,
                reason: format!("residuals ({:.3e}, {:.3e}) at (a, s) = ({}, {})", r[0], r[1], x[0], x[1]),
            });
        }
        iterations += 1;

        // Central-difference Jacobian of the residuals.
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut up = x;
            let mut down = x;
            up[k] += h;
            down[k] -= h;
            let (ru, rd) = (problem.residual(up)?, problem.residual(down)?);
            for i in 0..2 {
                jac[i][k] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let grad = [
            2.0 * (jac[0][0] * r[0] + jac[1][0] * r[1]),
            2.0 * (jac[0][1] * r[0] + jac[1][1] * r[1]),
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let dir = match solver.direction {
            Direction::GaussNewton if det.abs() > 1e-14 => [
                -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ],
            _ => [-grad[0], -grad[1]],
        };
        let slope = grad[0] * dir[0] + grad[1] * dir[1];
        if !(slope < 0.0) {
            return Err(Error::Solver {
                iterations,
                reason: "search direction is not a descent direction".into(),
            });
        }

        let mut step = 1.0;
        loop {
            let trial = [x[0] + step * dir[0], x[1] + step * dir[1]];
            // Overshooting into huge amplitudes can defeat the quadrature; treat that as a rejected step.
            if let Ok(rt) = problem.residual(trial) {
                let ft = objective(rt);
                if ft <= f + solver.armijo * step * slope {
                    x = trial;
                    r = rt;
                    f = ft;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::Solver {
                    iterations,
                    reason: format!("line search could not decrease the objective below {f:.3e}"),
                });
            }
        }
    }

    // C5 and C6 are even in a and in s separately.
    let refined = [x[0].abs(), x[1].abs()];
    for (got, start) in refined.iter().zip([seed.0, seed.1]) {
        if (got - start.abs()).abs() > 0.1 * start.abs() {
            return Err(Error::Solver {
                iterations,
                reason: format!("refined amplitude {got} strayed more than 10% from seed {start}"),
            });
        }
    }
    let spec = template_drive(template, xi, refined[0], refined[1])?;
    let residuals = constraint_residuals(&spec, target_phase, cfg)?;
    Ok(GateDesign {
        spec,
        target_phase,
        profile: Some(template),
        seed: Some([seed.0, seed.1]),
        refined: Some(refined),
        residuals: Some(residuals),
        iterations,
    })
}

/// First-sideband amplitude `c` of a single fundamental tone with
/// `Φ2(T) = -2π c²/ξ² = φ`, in rad/s.
pub fn ms_amplitude(xi: f64, target_phase: f64) -> Result<f64> {
    if !(target_phase < 0.0 && target_phase.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "a real single-tone amplitude needs a negative target phase, got {target_phase}"
        )));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidArgument("xi must be positive".into()));
    }
    Ok(xi * (-target_phase / TAU).sqrt())
}

/// Designs one of the built-in gates for rate `xi` and entangling phase `target_phase`.
pub fn design_profile(kind: Profile, xi: f64, target_phase: f64, solver: &SolverConfig, cfg: &QuadratureConfig) -> Result<GateDesign> {
    match kind {
        Profile::Robust => {
            let seed = solve_expanded(target_phase)?;
            refine_design(seed, Profile::Robust, target_phase, xi, solver, cfg)
        }
        Profile::Minimal => refine_design((MINIMAL_A3, MINIMAL_S2), Profile::Minimal, target_phase, xi, solver, cfg),
        Profile::Ms => {
            let a1 = ms_amplitude(1.0, target_phase)?;
            let spec = ms_drive(xi, a1)?;
            let residuals = constraint_residuals(&spec, target_phase, cfg)?;
            Ok(GateDesign {
                spec,
                target_phase,
                profile: Some(Profile::Ms),
                seed: Some([a1, 0.0]),
                refined: Some([a1, 0.0]),
                residuals: Some(residuals),
                iterations: 0,
            })
        }
    }
}

/// Drive-strength requirement of a design.
///
/// Convention: `omega_first = 2 max|w1|/ξ` (in units of ξ/η) and
/// `omega_second = 2 max|w2|/ξ` (in units of ξ/η²), so that
/// `Ω ≈ (omega_first/η + omega_second/η²) ξ`. The ratio is taken against a
/// single-tone gate of the same entangling phase under the same convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiEstimate {
    pub eta: f64,
    pub omega_first: f64,
    pub omega_second: f64,
    pub ratio_to_ms: f64,
}

impl RabiEstimate {
    /// `Ω/ξ`
    pub fn omega_over_xi(&self) -> f64 {
        self.omega_first / self.eta + self.omega_second / (self.eta * self.eta)
    }
}

/// Maximum of `f` over one period, by dense sampling and golden-section polish.
fn peak<F: Fn(f64) -> f64>(f: F) -> f64 {
    const SAMPLES: usize = 4096;
    let h = TAU / SAMPLES as f64;
    let (best, _) = (0..SAMPLES)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    f(best as f64 * h).max(f(0.5 * (lo + hi)))
}

pub fn rabi_estimate(design: &GateDesign, eta: f64) -> Result<RabiEstimate> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("Lamb-Dicke parameter must lie in (0, 1), got {eta}")));
    }
    let spec = &design.spec;
    let omega_first = 2.0 * peak(|t| spec.w1_at(t).norm());
    let omega_second = 2.0 * peak(|t| spec.w2_at(t).abs());
    let reference = 2.0 * ms_amplitude(1.0, design.target_phase)?;
    let omega = omega_first / eta + omega_second / (eta * eta);
    Ok(RabiEstimate {
        eta,
        omega_first,
        omega_second,
        ratio_to_ms: omega / (reference / eta),
    })
}
