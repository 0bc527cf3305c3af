//! Phase-space displacement and spin-phase functionals of the
//! displacement-plus-squeezing evolution.
//!
//! With `C = cosh r`, `S = sinh r`, `A = {w1 C}` and `B = {w1 S}`:
//!
//! * `α_m = -i (A - m conj(B))` for the `J_x = m` branch,
//! * `Φ2 = Im{conj(w1) C {w1 C}}`,
//! * `Φ3 = Im[{w1 C {w1 S}} + {conj(w1) S {conj(w1) C}}]`,
//! * `Φ4 = Im{w1 S {conj(w1) S}}`,
//!
//! and branch `m` of the evolution is `S(m r) D(m α_m) e^{-i(Φ2 + Φ4 + m Φ3)}`.
//! All quantities are evaluated in one sweep that carries `A` and `B` as
//! running antiderivatives.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::error::{Error, Result};
use crate::quadrature::{certified, integrate, panels_through, QuadratureConfig};

/// Default entangling phase, mapping product states onto Bell states.
pub const TARGET_PHASE: f64 = -FRAC_PI_2;

/// Relative Rabi step used for the C6 derivative.
pub const RABI_STEP: f64 = 1e-4;

/// Eigenvalue `m` of the collective spin `J_x` for two qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Zero,
    Minus,
}

impl Branch {
    pub fn m(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Zero => 0.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(self) -> i8 {
        self.m() as i8
    }
}

impl TryFrom<i32> for Branch {
    type Error = Error;

    fn try_from(m: i32) -> Result<Self> {
        match m {
            1 => Ok(Branch::Plus),
            0 => Ok(Branch::Zero),
            -1 => Ok(Branch::Minus),
            other => Err(Error::InvalidArgument(format!("branch must be -1, 0 or 1, got {other}"))),
        }
    }
}

/// Everything the closed-form evolution needs at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunctionals {
    /// Dimensionless time ξt.
    pub tau: f64,
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub r: f64,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
}

impl PhaseFunctionals {
    /// Coefficient of `J_x²` in the spin phase.
    pub fn entangling_phase(&self) -> f64 {
        self.phi2 + self.phi4
    }

    pub fn alpha(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Plus => self.alpha_plus,
            Branch::Minus => self.alpha_minus,
            Branch::Zero => 0.5 * (self.alpha_plus + self.alpha_minus),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Raw {
    a: Complex64,
    b: Complex64,
    phi2: Complex64,
    phi3: Complex64,
    phi4: Complex64,
}

impl Raw {
    fn flatten(points: &[Raw]) -> Vec<Complex64> {
        points.iter().flat_map(|p| [p.a, p.b, p.phi2, p.phi3, p.phi4]).collect()
    }

    fn unflatten(values: &[Complex64]) -> Vec<Raw> {
        values
            .chunks_exact(5)
            .map(|c| Raw {
                a: c[0],
                b: c[1],
                phi2: c[2],
                phi3: c[3],
                phi4: c[4],
            })
            .collect()
    }
}

/// One left-to-right sweep recording the running integrals at every breakpoint.
fn sweep(spec: &DriveSpec, breaks: &[f64], density: usize, cfg: &QuadratureConfig) -> Vec<Raw> {
    let rule = cfg.rule();
    let n = rule.len();
    let mut f1 = vec![Complex64::default(); n];
    let mut f2 = vec![Complex64::default(); n];
    let mut pa = vec![Complex64::default(); n];
    let mut pb = vec![Complex64::default(); n];
    let mut outer2 = vec![Complex64::default(); n];
    let mut outer3 = vec![Complex64::default(); n];
    let mut outer4 = vec![Complex64::default(); n];

    let mut acc = Raw::default();
    let mut out = vec![Raw::default(); breaks.len()];
    for panel in panels_through(breaks, density) {
        if panel.hi > panel.lo {
            for (j, tau) in rule.abscissae(panel.lo, panel.hi).enumerate() {
                let w1 = spec.w1_at(tau);
                let r = spec.r_at(tau);
                f1[j] = w1 * r.cosh();
                f2[j] = w1 * r.sinh();
            }
            rule.partial_integrals(panel.lo, panel.hi, &f1, &mut pa);
            rule.partial_integrals(panel.lo, panel.hi, &f2, &mut pb);
            for j in 0..n {
                let a = acc.a + pa[j];
                let b = acc.b + pb[j];
                outer2[j] = f1[j].conj() * a;
                outer3[j] = f1[j] * b + (f2[j] * a).conj();
                outer4[j] = f2[j] * b.conj();
            }
            acc.a += rule.panel_integral(panel.lo, panel.hi, &f1);
            acc.b += rule.panel_integral(panel.lo, panel.hi, &f2);
            acc.phi2 += rule.panel_integral(panel.lo, panel.hi, &outer2);
            acc.phi3 += rule.panel_integral(panel.lo, panel.hi, &outer3);
            acc.phi4 += rule.panel_integral(panel.lo, panel.hi, &outer4);
        }
        if let Some(idx) = panel.closes {
            out[idx] = acc;
        }
    }
    out
}

fn assemble(spec: &DriveSpec, tau: f64, raw: &Raw) -> PhaseFunctionals {
    let i = Complex64::i();
    let alpha_plus = -i * (raw.a - raw.b.conj());
    let alpha_minus = -i * (raw.a + raw.b.conj());
    let r = spec.r_at(tau);
    let (ch, sh) = (r.cosh(), r.sinh());
    PhaseFunctionals {
        tau,
        alpha_plus,
        alpha_minus,
        r,
        gamma_plus: alpha_plus * ch - alpha_plus.conj() * sh,
        gamma_minus: alpha_minus * ch + alpha_minus.conj() * sh,
        phi2: raw.phi2.im,
        phi3: raw.phi3.im,
        phi4: raw.phi4.im,
    }
}

/// Functionals at a non-decreasing list of dimensionless times, from a single
/// certified sweep.
pub fn phase_functionals_many(spec: &DriveSpec, taus: &[f64], cfg: &QuadratureConfig) -> Result<Vec<PhaseFunctionals>> {
    if taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be finite, non-negative and sorted".into()));
    }
    if taus.is_empty() {
        return Ok(Vec::new());
    }
    let values = certified(cfg, |density| Raw::flatten(&sweep(spec, taus, density, cfg)))?;
    Ok(Raw::unflatten(&values)
        .iter()
        .zip(taus)
        .map(|(raw, &tau)| assemble(spec, tau, raw))
        .collect())
}

/// Functionals at dimensionless time `tau`.
pub fn phase_functionals(spec: &DriveSpec, tau: f64, cfg: &QuadratureConfig) -> Result<PhaseFunctionals> {
    Ok(phase_functionals_many(spec, &[tau], cfg)?[0])
}

/// Phase-space displacement `{-i(w1 cosh r - m conj(w1) sinh r)}` of one branch.
///
/// The `m = 0` branch is evaluated for completeness only: `J_x` annihilates
/// those spin states, so they are never displaced.
pub fn alpha(spec: &DriveSpec, branch: Branch, tau: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let values = certified(cfg, |density| Raw::flatten(&sweep(spec, &[tau], density, cfg)))?;
    let raw = Raw::unflatten(&values)[0];
    Ok(-Complex64::i() * (raw.a - branch.m() * raw.b.conj()))
}

/// `Φ2 + Φ4` at the end of a gate of dimensionless length `tau_end`.
pub fn entangling_phase(spec: &DriveSpec, tau_end: f64, cfg: &QuadratureConfig) -> Result<f64> {
    phase_functionals(spec, tau_end, cfg).map(|pf| pf.entangling_phase())
}

/// `∂(Φ2 + Φ4)/∂λ` at `λ = 1` for a common scaling of all drive amplitudes,
/// by a Richardson-extrapolated central difference.
pub fn rabi_sensitivity(spec: &DriveSpec, cfg: &QuadratureConfig) -> Result<f64> {
    let phase = |lambda: f64| entangling_phase(&spec.scaled(lambda), TAU, cfg);
    let central = |h: f64| -> Result<f64> { Ok((phase(1.0 + h)? - phase(1.0 - h)?) / (2.0 * h)) };
    let coarse = central(RABI_STEP)?;
    let fine = central(0.5 * RABI_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Residuals of the six gate constraints at `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    /// `{w1 cosh r}`
    pub c1: Complex64,
    /// `{conj(w1) sinh r}`
    pub c2: Complex64,
    /// `r(T) = -2 {w2}`
    pub c3: f64,
    /// `Φ3(T)`
    pub c4: f64,
    /// `Φ2 + Φ4 - φ` at `T`
    pub c5: f64,
    /// `∂(Φ2 + Φ4)/∂(δΩ/Ω)` at `T`, radians per unit relative Rabi deviation.
    pub c6: f64,
}

impl ConstraintResiduals {
    /// `max(|c1|, |c2|, |c3|, |c4|)`
    pub fn structural(&self) -> f64 {
        self.c1.norm().max(self.c2.norm()).max(self.c3.abs()).max(self.c4.abs())
    }

    pub fn as_array(&self) -> [(&'static str, f64); 6] {
        [
            ("C1", self.c1.norm()),
            ("C2", self.c2.norm()),
            ("C3", self.c3.abs()),
            ("C4", self.c4.abs()),
            ("C5", self.c5.abs()),
            ("C6", self.c6.abs()),
        ]
    }
}

pub fn constraint_residuals(spec: &DriveSpec, target_phase: f64, cfg: &QuadratureConfig) -> Result<ConstraintResiduals> {
    let pf_values = certified(cfg, |density| Raw::flatten(&sweep(spec, &[TAU], density, cfg)))?;
    let raw = Raw::unflatten(&pf_values)[0];
    let pf = assemble(spec, TAU, &raw);
    let w2_mean = integrate(|t| Complex64::new(spec.w2_at(t), 0.0), TAU, cfg)?;
    Ok(ConstraintResiduals {
        c1: raw.a,
        c2: raw.b.conj(),
        c3: -2.0 * w2_mean.re,
        c4: pf.phi3,
        c5: pf.entangling_phase() - target_phase,
        c6: rabi_sensitivity(spec, cfg)?,
    })
}

/// Standard deviations `(Δx, Δp) = (e^{-r}/2, e^r/2)` of `x = (a + a†)/2` and
/// `p = (a - a†)/2i` on the `m = +1` branch at dimensionless time `tau`.
/// With `S(r) = exp[r(a² - a†²)/2]`, `x` is the squeezed quadrature for `r > 0`.
pub fn quadrature_widths(spec: &DriveSpec, tau: f64) -> (f64, f64) {
    let r = spec.r_at(tau);
    (0.5 * (-r).exp(), 0.5 * r.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{make_profile, ms_drive, DriveSpec, Harmonic, Profile};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn random_family(rng: &mut ChaCha8Rng) -> DriveSpec {
        let n_odd = rng.gen_range(1..=3);
        let n_sine = rng.gen_range(1..=2);
        let odd = (0..n_odd).map(|i| Harmonic::new(2 * i + 1, rng.gen_range(-1.0..1.0))).collect();
        let sine = (0..n_sine).map(|i| Harmonic::new(2 * i + 2, rng.gen_range(-1.0..1.0))).collect();
        DriveSpec::new(1.0, odd, sine).unwrap()
    }

    #[test]
    fn zero_time_is_all_zero() {
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        let pf = phase_functionals(&spec, 0.0, &cfg()).unwrap();
        assert_eq!(pf.alpha_plus, Complex64::default());
        assert_eq!(pf.phi2, 0.0);
        assert_eq!(pf.phi3, 0.0);
        assert_eq!(pf.phi4, 0.0);
        assert_eq!(pf.r, 0.0);
    }

    #[test]
    fn robust_gate_closes() {
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        let pf = phase_functionals(&spec, TAU, &cfg()).unwrap();
        assert!(pf.alpha_plus.norm() < 1e-10);
        assert!(pf.alpha_minus.norm() < 1e-10);
        assert!(pf.phi3.abs() < 1e-10);
        // Published amplitudes are rounded to four digits.
        assert_abs_diff_eq!(pf.entangling_phase(), -PI / 2.0, epsilon = 2e-4);
    }

    #[test]
    fn ms_profile_phase() {
        // Φ2 = -2π a1² exactly for a single fundamental tone.
        let pf = phase_functionals(&make_profile(Profile::Ms, 1.0).unwrap(), TAU, &cfg()).unwrap();
        assert_abs_diff_eq!(pf.phi2, -PI / 2.0, epsilon = 1e-12);
        assert_eq!(pf.phi3, 0.0);
        assert_eq!(pf.phi4, 0.0);
        assert_eq!(pf.alpha_plus, pf.alpha_minus);

        let other = ms_drive(1.0, 0.3).unwrap();
        let pf = phase_functionals(&other, TAU, &cfg()).unwrap();
        assert_abs_diff_eq!(pf.phi2, -2.0 * PI * 0.09, epsilon = 1e-12);
    }

    #[test]
    fn ms_residuals() {
        let res = constraint_residuals(&make_profile(Profile::Ms, 1.0).unwrap(), TARGET_PHASE, &cfg()).unwrap();
        assert!(res.c5.abs() < 1e-12);
        // Φ2 ∝ λ²: d/dλ (-π/2 λ²) = -π.
        assert_abs_diff_eq!(res.c6, -PI, epsilon = 1e-8);
        assert!(res.structural() < 1e-12);
    }

    #[test]
    fn robust_and_minimal_residuals() {
        for kind in [Profile::Robust, Profile::Minimal] {
            let res = constraint_residuals(&make_profile(kind, 1.0).unwrap(), TARGET_PHASE, &cfg()).unwrap();
            assert!(res.structural() < 1e-8, "{kind}: {res:?}");
            // Rounded published amplitudes only get close to C5/C6.
            assert!(res.c5.abs() < 1e-3, "{kind}: {res:?}");
            assert!(res.c6.abs() < 1e-2, "{kind}: {res:?}");
        }
    }

    #[test]
    fn branch_alpha_matches_sweep() {
        let spec = make_profile(Profile::Minimal, 1.0).unwrap();
        let pf = phase_functionals(&spec, 1.7, &cfg()).unwrap();
        assert_abs_diff_eq!((alpha(&spec, Branch::Plus, 1.7, &cfg()).unwrap() - pf.alpha_plus).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((alpha(&spec, Branch::Minus, 1.7, &cfg()).unwrap() - pf.alpha_minus).norm(), 0.0, epsilon = 1e-14);
        let zero = alpha(&spec, Branch::Zero, 1.7, &cfg()).unwrap();
        let direct = integrate(|t| -Complex64::i() * spec.w1_at(t) * spec.r_at(t).cosh(), 1.7, &cfg()).unwrap();
        assert_abs_diff_eq!((zero - direct).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nested_functionals_match_generic_quadrature() {
        // Independent route through quadrature::nested_integrate.
        use crate::quadrature::nested_integrate;
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        let f1 = |t: f64| spec.w1_at(t) * spec.r_at(t).cosh();
        let f2 = |t: f64| spec.w1_at(t) * spec.r_at(t).sinh();
        let tau = 4.1;
        let phi2 = nested_integrate(|t| f1(t).conj(), f1, tau, &cfg()).unwrap().im;
        let phi3 = nested_integrate(f1, f2, tau, &cfg()).unwrap().im
            + nested_integrate(|t| f2(t).conj(), |t| f1(t).conj(), tau, &cfg()).unwrap().im;
        let phi4 = nested_integrate(f2, |t| f2(t).conj(), tau, &cfg()).unwrap().im;
        let pf = phase_functionals(&spec, tau, &cfg()).unwrap();
        assert_abs_diff_eq!(pf.phi2, phi2, epsilon = 1e-12);
        assert_abs_diff_eq!(pf.phi3, phi3, epsilon = 1e-12);
        assert_abs_diff_eq!(pf.phi4, phi4, epsilon = 1e-12);
    }

    #[test]
    fn phi3_vanishes_for_random_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let spec = random_family(&mut rng);
            let res = constraint_residuals(&spec, TARGET_PHASE, &cfg()).unwrap();
            assert!(res.structural() < 1e-8, "{spec:?}: {res:?}");
        }
    }

    #[test]
    fn sign_flips_leave_phase_invariant() {
        let base = make_profile(Profile::Robust, 1.0).unwrap();
        let flip = |sa: f64, ss: f64| DriveSpec {
            odd_harmonics: base.odd_harmonics.iter().map(|h| Harmonic::new(h.order, sa * h.coeff)).collect(),
            sine_harmonics: base.sine_harmonics.iter().map(|h| Harmonic::new(h.order, ss * h.coeff)).collect(),
            ..base.clone()
        };
        let reference = constraint_residuals(&base, TARGET_PHASE, &cfg()).unwrap();
        for (sa, ss) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let res = constraint_residuals(&flip(sa, ss), TARGET_PHASE, &cfg()).unwrap();
            assert_abs_diff_eq!(res.c5, reference.c5, epsilon = 1e-10);
            assert_abs_diff_eq!(res.c6, reference.c6, epsilon = 1e-10);
        }
    }

    #[test]
    fn reflection_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = random_family(&mut rng);
        let mut taus: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..TAU)).collect();
        taus.sort_by(f64::total_cmp);
        let mirrored: Vec<f64> = taus.iter().rev().map(|t| TAU - t).collect();
        let direct = phase_functionals_many(&spec, &taus, &cfg()).unwrap();
        let reflected = phase_functionals_many(&spec, &mirrored, &cfg()).unwrap();
        for (d, r) in direct.iter().zip(reflected.iter().rev()) {
            assert!((d.alpha_minus - r.alpha_plus.conj()).norm() < 1e-10, "{} {:?} {:?}", d.tau, d.alpha_minus, r.alpha_plus);
        }
    }

    #[test]
    fn gamma_identity_independent_check() {
        // Build S(r) D(α) in a truncated Fock space and read off ⟨a⟩ = γ.
        use crate::oracle::{displaced_squeezed_mean, FockConfig};
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        let pf = phase_functionals(&spec, 2.2, &cfg()).unwrap();
        let fock = FockConfig::default();
        let mean = displaced_squeezed_mean(pf.alpha_plus, pf.r, &fock);
        assert!((mean - pf.gamma_plus).norm() < 1e-10, "{mean} vs {}", pf.gamma_plus);
        let mean = displaced_squeezed_mean(-pf.alpha_minus, -pf.r, &fock);
        assert!((mean + pf.gamma_minus).norm() < 1e-10);
    }

    #[test]
    fn widths() {
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        assert_eq!(quadrature_widths(&spec, 0.0), (0.5, 0.5));
        let (dx, dp) = quadrature_widths(&spec, TAU / 8.0);
        assert_abs_diff_eq!(dx, 0.5 * (-0.7820f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(dp, 0.5 * 0.7820f64.exp(), epsilon = 1e-14);
        for k in 0..50 {
            let (dx, dp) = quadrature_widths(&spec, 0.13 * k as f64);
            assert_abs_diff_eq!(dx * dp, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn no_squeezing_means_no_higher_phases() {
        let spec = DriveSpec::new(1.0, vec![Harmonic::new(1, 0.4), Harmonic::new(3, -0.2)], vec![]).unwrap();
        let pf = phase_functionals(&spec, 3.3, &cfg()).unwrap();
        assert_eq!(pf.phi3, 0.0);
        assert_eq!(pf.phi4, 0.0);
        assert_eq!(pf.alpha_plus, pf.alpha_minus);
    }

    #[test]
    fn rejects_unsorted_times() {
        let spec = make_profile(Profile::Ms, 1.0).unwrap();
        assert!(phase_functionals_many(&spec, &[1.0, 0.5], &cfg()).is_err());
        assert!(Branch::try_from(2).is_err());
    }
}
