//! Brute-force propagation of the interaction Hamiltonian
//! `H_m(τ) = m [w1 a† + i w2 a†²] + h.c.` in a truncated Fock space, one
//! `J_x` branch at a time.
//!
//! Each step applies `exp(-i H(τ_mid) Δτ)` to the state (second order in
//! `Δτ`). The exponential action is summed as a Taylor series, with
//! sub-steps whenever `‖H‖Δτ` is large, so the banded structure of `H` is
//! never densified. A motional detuning `δν` enters as
//! `w1 → w1 e^{iδν t}`, `w2 → w2 e^{2iδν t}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::designer::GateDesign;
use crate::drive::{DriveSpec, ErrorModel};
use crate::error::{Error, Result};
use crate::fidelity::{FidelityResult, Method};
use crate::functionals::Branch;

/// Number of top Fock levels watched for truncation overflow.
const TAIL_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockConfig {
    /// Dimension of the oscillator space.
    pub n_max: usize,
    pub steps_per_period: usize,
    /// Maximum population allowed in the top four levels.
    pub tail_tol: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            n_max: 160,
            steps_per_period: 4096,
            tail_tol: 1e-8,
        }
    }
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 8 {
            return Err(Error::InvalidArgument("n_max must be at least 8".into()));
        }
        if self.steps_per_period < 256 {
            return Err(Error::InvalidArgument("steps_per_period must be at least 256".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidArgument("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Oscillator state of one spin branch, in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub branch: Branch,
    pub amplitudes: Vec<Complex64>,
}

impl BranchState {
    pub fn fock(branch: Branch, n: usize, n_max: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); n_max];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        BranchState { branch, amplitudes }
    }

    pub fn vacuum(branch: Branch, n_max: usize) -> Self {
        Self::fock(branch, 0, n_max)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨n|ψ⟩`
    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amplitudes.get(n).copied().unwrap_or_default()
    }

    /// Population of the top four levels.
    pub fn tail_population(&self) -> f64 {
        let n = self.amplitudes.len();
        self.amplitudes[n.saturating_sub(TAIL_LEVELS)..].iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨a⟩`
    pub fn mean_a(&self) -> Complex64 {
        self.amplitudes
            .windows(2)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[1] * ((n + 1) as f64).sqrt())
            .sum()
    }

    /// Variances of `(a + a†)/2` and `(a - a†)/(2i)`.
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let mean = self.mean_a();
        let a2: Complex64 = self
            .amplitudes
            .windows(3)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[2] * (((n + 1) * (n + 2)) as f64).sqrt())
            .sum();
        let number: f64 = self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum();
        let re2 = (2.0 * a2.re + 2.0 * number + 1.0) / 4.0;
        let im2 = (-2.0 * a2.re + 2.0 * number + 1.0) / 4.0;
        (re2 - mean.re * mean.re, im2 - mean.im * mean.im)
    }
}

/// Ladder-operator matrix elements for a fixed truncation.
struct Ladder {
    /// `√(n+1)`
    one: Vec<f64>,
    /// `√((n+1)(n+2))`
    two: Vec<f64>,
}

impl Ladder {
    fn new(n_max: usize) -> Self {
        Ladder {
            one: (0..n_max).map(|n| ((n + 1) as f64).sqrt()).collect(),
            two: (0..n_max).map(|n| (((n + 1) * (n + 2)) as f64).sqrt()).collect(),
        }
    }

    /// `out = u a†ψ + v aψ + p a†²ψ + q a²ψ`
    fn apply(&self, u: Complex64, v: Complex64, p: Complex64, q: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        let n_max = psi.len();
        for n in 0..n_max {
            let mut acc = Complex64::default();
            if n >= 1 {
                acc += u * self.one[n - 1] * psi[n - 1];
            }
            if n + 1 < n_max {
                acc += v * self.one[n] * psi[n + 1];
            }
            if n >= 2 {
                acc += p * self.two[n - 2] * psi[n - 2];
            }
            if n + 2 < n_max {
                acc += q * self.two[n] * psi[n + 2];
            }
            out[n] = acc;
        }
    }

    /// Upper bound on the operator norm of the form above.
    fn bound(&self, u: Complex64, v: Complex64, p: Complex64, q: Complex64) -> f64 {
        let n = self.one.len();
        (u.norm() + v.norm()) * self.one[n - 1] + (p.norm() + q.norm()) * self.two[n - 1]
    }
}

/// `ψ ← exp(L) ψ` for `L = u a† + v a + p a†² + q a²`, by Taylor series with
/// sub-steps keeping `‖L‖ ≤ ½`.
fn exp_action(ladder: &Ladder, u: Complex64, v: Complex64, p: Complex64, q: Complex64, psi: &mut [Complex64], scratch: &mut [Vec<Complex64>; 2]) {
    let bound = ladder.bound(u, v, p, q);
    let substeps = ((bound / 0.5).ceil() as usize).max(1);
    let k = 1.0 / substeps as f64;
    let (u, v, p, q) = (u * k, v * k, p * k, q * k);
    let [term, next] = scratch;
    for _ in 0..substeps {
        term.copy_from_slice(psi);
        for order in 1..40 {
            ladder.apply(u, v, p, q, term, next);
            let inv = 1.0 / order as f64;
            let mut size = 0.0;
            for (t, (x, s)) in term.iter_mut().zip(next.iter().zip(psi.iter_mut())) {
                *t = x * inv;
                *s += *t;
                size += t.norm_sqr();
            }
            if size < 1e-36 {
                break;
            }
        }
    }
}

struct Stepper<'a> {
    spec: DriveSpec,
    m: f64,
    detuning: f64,
    ladder: Ladder,
    fock: &'a FockConfig,
    scratch: [Vec<Complex64>; 2],
    max_tail: f64,
}

impl<'a> Stepper<'a> {
    fn new(spec: &DriveSpec, branch: Branch, err: &ErrorModel, fock: &'a FockConfig) -> Self {
        Stepper {
            spec: spec.scaled(1.0 + err.delta_omega_rel),
            m: branch.m(),
            detuning: err.delta_nu_over_xi,
            ladder: Ladder::new(fock.n_max),
            fock,
            scratch: [vec![Complex64::default(); fock.n_max], vec![Complex64::default(); fock.n_max]],
            max_tail: 0.0,
        }
    }

    /// Advances `psi` from `from` to `to` with midpoint exponentials.
    fn advance(&mut self, psi: &mut [Complex64], from: f64, to: f64) {
        let len = to - from;
        if len <= 0.0 {
            return;
        }
        let steps = ((self.fock.steps_per_period as f64 * len / TAU).ceil() as usize).max(1);
        let dt = len / steps as f64;
        let i = Complex64::i();
        for k in 0..steps {
            let mid = from + (k as f64 + 0.5) * dt;
            let w1 = self.spec.w1_at(mid) * Complex64::from_polar(1.0, self.detuning * mid);
            let w2 = Complex64::from_polar(self.spec.w2_at(mid), 2.0 * self.detuning * mid);
            // -i Δτ H with H = m[w1 a† + i w2 a†² + w1* a - i w2* a²]
            let f = -i * dt * self.m;
            exp_action(&self.ladder, f * w1, f * w1.conj(), f * i * w2, -f * i * w2.conj(), psi, &mut self.scratch);
            let tail: f64 = psi[psi.len() - TAIL_LEVELS..].iter().map(|c| c.norm_sqr()).sum();
            self.max_tail = self.max_tail.max(tail);
        }
    }
}

/// Result of a propagation together with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub states: Vec<BranchState>,
    /// Largest top-level population seen at any step.
    pub max_tail: f64,
}

/// Propagates `initial` through the gate and returns the state at each of the
/// sorted dimensionless times in `taus`.
pub fn propagate_branch_sampled(
    spec: &DriveSpec,
    err: &ErrorModel,
    fock: &FockConfig,
    initial: &BranchState,
    taus: &[f64],
) -> Result<Propagation> {
    fock.validate()?;
    if initial.amplitudes.len() != fock.n_max {
        return Err(Error::InvalidArgument(format!(
            "initial state has dimension {}, expected {}",
            initial.amplitudes.len(),
            fock.n_max
        )));
    }
    if !err.is_finite() || taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times and errors must be finite; times sorted".into()));
    }
    let branch = initial.branch;
    if branch == Branch::Zero {
        return Ok(Propagation {
            states: taus.iter().map(|_| initial.clone()).collect(),
            max_tail: initial.tail_population(),
        });
    }
    let mut stepper = Stepper::new(spec, branch, err, fock);
    let mut psi = initial.amplitudes.clone();
    let mut states = Vec::with_capacity(taus.len());
    let mut at = 0.0;
    for &tau in taus {
        stepper.advance(&mut psi, at, tau);
        at = tau;
        if psi.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(branch.label()));
        }
        states.push(BranchState {
            branch,
            amplitudes: psi.clone(),
        });
    }
    Ok(Propagation {
        states,
        max_tail: stepper.max_tail,
    })
}

/// Propagates one branch over the (possibly mistimed) gate.
///
/// Fails when the final state leaks more than `tail_tol` into the top Fock
/// levels.
pub fn propagate_branch(
    spec: &DriveSpec,
    branch: Branch,
    err: &ErrorModel,
    fock: &FockConfig,
    initial: &BranchState,
) -> Result<BranchState> {
    let initial = BranchState {
        branch,
        amplitudes: initial.amplitudes.clone(),
    };
    let mut run = propagate_branch_sampled(spec, err, fock, &initial, &[err.tau_end()])?;
    let state = run.states.pop().expect("one sample requested");
    let tail = state.tail_population();
    if tail > fock.tail_tol {
        return Err(Error::TruncationOverflow {
            branch: branch.label(),
            population: tail,
            tolerance: fock.tail_tol,
        });
    }
    Ok(state)
}

/// Gate fidelity `|⟨00;n| U_ideal† U |00;n⟩|²` with `U_ideal = exp(-iφ J_x²)`,
/// assembled from the `m = ±1` propagations (the `m = 0` states do not move).
pub fn numeric_fidelity_for(
    spec: &DriveSpec,
    target_phase: f64,
    err: &ErrorModel,
    fock: &FockConfig,
    initial_n: usize,
) -> Result<FidelityResult> {
    fock.validate()?;
    if 2 * initial_n >= fock.n_max {
        return Err(Error::InvalidArgument(format!(
            "initial Fock level {initial_n} must be below n_max/2 = {}",
            fock.n_max / 2
        )));
    }
    let run = |branch: Branch| {
        propagate_branch(spec, branch, err, fock, &BranchState::fock(branch, initial_n, fock.n_max)).map(|s| s.amplitude(initial_n))
    };
    let (plus, minus) = rayon::join(|| run(Branch::Plus), || run(Branch::Minus));
    let (plus, minus) = (plus?, minus?);
    let amplitude = 0.5 + 0.25 * Complex64::from_polar(1.0, target_phase) * (plus + minus);
    Ok(FidelityResult {
        fidelity: amplitude.norm_sqr(),
        error_point: *err,
        method: Method::Oracle,
        functionals: None,
    })
}

pub fn numeric_fidelity(design: &GateDesign, err: &ErrorModel, fock: &FockConfig, initial_n: usize) -> Result<FidelityResult> {
    numeric_fidelity_for(&design.spec, design.target_phase, err, fock, initial_n)
}

/// Self-consistency of an oracle fidelity under finer stepping and a larger
/// truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub fidelity: Option<f64>,
    pub fidelity_steps_doubled: Option<f64>,
    pub fidelity_nmax_increased: Option<f64>,
    pub delta_steps: Option<f64>,
    pub delta_nmax: Option<f64>,
    pub tail_flag: bool,
    pub converged: bool,
    pub failures: Vec<String>,
}

/// Agreement required between refinements for a converged verdict.
pub const CONVERGENCE_TOL: f64 = 1e-6;

pub fn convergence_report(design: &GateDesign, err: &ErrorModel, fock: &FockConfig) -> ConvergenceReport {
    let eval = |cfg: FockConfig| numeric_fidelity(design, err, &cfg, 0);
    let finer = FockConfig {
        steps_per_period: 2 * fock.steps_per_period,
        ..*fock
    };
    let larger = FockConfig {
        n_max: fock.n_max + 16,
        ..*fock
    };
    let mut failures = Vec::new();
    let mut tail_flag = false;
    let mut keep = |r: Result<FidelityResult>| match r {
        Ok(v) => Some(v.fidelity),
        Err(e) => {
            tail_flag |= matches!(e, Error::TruncationOverflow { .. });
            failures.push(e.to_string());
            None
        }
    };
    let base = keep(eval(*fock));
    let doubled = keep(eval(finer));
    let increased = keep(eval(larger));
    let delta = |x: Option<f64>| base.zip(x).map(|(a, b)| (a - b).abs());
    let delta_steps = delta(doubled);
    let delta_nmax = delta(increased);
    let converged = failures.is_empty()
        && delta_steps.is_some_and(|d| d < CONVERGENCE_TOL)
        && delta_nmax.is_some_and(|d| d < CONVERGENCE_TOL);
    ConvergenceReport {
        fidelity: base,
        fidelity_steps_doubled: doubled,
        fidelity_nmax_increased: increased,
        delta_steps,
        delta_nmax,
        tail_flag,
        converged,
        failures,
    }
}

/// `⟨a⟩` of `S(r) D(α)|0⟩` built directly in the Fock basis, with
/// `S(r) = exp[r(a² - a†²)/2]`.
pub fn displaced_squeezed_mean(alpha: Complex64, r: f64, fock: &FockConfig) -> Complex64 {
    let ladder = Ladder::new(fock.n_max);
    let mut psi = vec![Complex64::default(); fock.n_max];
    let mut scratch = [psi.clone(), psi.clone()];
    psi[0] = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    // D(α) = exp(α a† - α* a)
    exp_action(&ladder, alpha, -alpha.conj(), zero, zero, &mut psi, &mut scratch);
    let half = Complex64::new(0.5 * r, 0.0);
    exp_action(&ladder, zero, zero, -half, half, &mut psi, &mut scratch);
    BranchState {
        branch: Branch::Plus,
        amplitudes: psi,
    }
    .mean_a()
}
