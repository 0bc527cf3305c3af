//! Spectral drive family.
//!
//! A drive is described by the gate rate `xi` and two real Fourier series:
//! the first-sideband modulation `w1(τ) = λ Σ a_k e^{ikτ}` over odd harmonics
//! `k`, and the squeezing parameter `r(τ) = λ Σ s_k sin(kτ)` over even
//! harmonics `k`. The second-sideband modulation follows as
//! `w2 = -½ ∂r/∂t`. Everything here works in the dimensionless time
//! `τ = ξ t ∈ [0, 2π]` with amplitudes in units of `ξ`; the `eval_*` methods
//! convert to physical units.
//!
//! With this structure `w1(2π-τ) = conj(w1(τ))`, `w1(τ+π) = -w1(τ)`,
//! `r(2π-τ) = -r(τ)` and `r(τ+π) = r(τ)` hold for every coefficient set.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest harmonic order accepted in a design.
pub const MAX_HARMONIC: u32 = 64;

/// Amplitude of the robust drive's first-sideband series, in units of ξ.
pub const ROBUST_A: f64 = 0.3608;
/// Amplitude of the robust drive's squeezing series.
pub const ROBUST_S: f64 = 0.7820;
/// Single-tone minimal gate coefficients `(a_3, s_2)`.
pub const MINIMAL_A3: f64 = -1.1521;
pub const MINIMAL_S2: f64 = -0.8896;

/// One Fourier component: harmonic order `k` (a multiple of ξ) and its real
/// coefficient. Serialized as the pair `[k, coeff]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, f64)", into = "(u32, f64)")]
pub struct Harmonic {
    pub order: u32,
    pub coeff: f64,
}

impl Harmonic {
    pub fn new(order: u32, coeff: f64) -> Self {
        Harmonic { order, coeff }
    }
}

impl From<(u32, f64)> for Harmonic {
    fn from((order, coeff): (u32, f64)) -> Self {
        Harmonic { order, coeff }
    }
}

impl From<Harmonic> for (u32, f64) {
    fn from(h: Harmonic) -> Self {
        (h.order, h.coeff)
    }
}

/// A drive of the spectral family. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Gate rate ξ = 2π/T in rad/s.
    #[serde(rename = "xi_rad_per_s")]
    pub xi: f64,
    /// Odd harmonics of `w1`, coefficients in units of ξ.
    pub odd_harmonics: Vec<Harmonic>,
    /// Even sine harmonics of `r`, dimensionless coefficients.
    pub sine_harmonics: Vec<Harmonic>,
    /// Multiplier λ = 1 + δΩ/Ω applied to every coefficient.
    #[serde(default = "unit_scale")]
    pub rabi_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl DriveSpec {
    /// Builds and validates a drive with `rabi_scale = 1`.
    pub fn new(xi: f64, odd_harmonics: Vec<Harmonic>, sine_harmonics: Vec<Harmonic>) -> Result<Self> {
        let spec = DriveSpec {
            xi,
            odd_harmonics,
            sine_harmonics,
            rabi_scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural invariants of the family.
    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::InvalidDrive(format!("xi must be positive and finite, got {}", self.xi)));
        }
        if !self.rabi_scale.is_finite() {
            return Err(Error::InvalidDrive("rabi_scale must be finite".into()));
        }
        check_series(&self.odd_harmonics, "odd_harmonics", |k| k % 2 == 1)?;
        check_series(&self.sine_harmonics, "sine_harmonics", |k| k % 2 == 0)?;
        Ok(())
    }

    /// Gate time T = 2π/ξ in seconds.
    pub fn period(&self) -> f64 {
        TAU / self.xi
    }

    /// `w1(τ)` in units of ξ.
    pub fn w1_at(&self, tau: f64) -> Complex64 {
        let sum: Complex64 = self
            .odd_harmonics
            .iter()
            .map(|h| Complex64::from_polar(h.coeff, h.order as f64 * tau))
            .sum();
        sum * self.rabi_scale
    }

    /// `r(τ)`, dimensionless.
    pub fn r_at(&self, tau: f64) -> f64 {
        // sin(k·2π) is not exactly zero in floating point; reduce first so r(0) = r(2π) = 0.
        let phase = tau.rem_euclid(TAU);
        let sum: f64 = self
            .sine_harmonics
            .iter()
            .map(|h| h.coeff * (h.order as f64 * phase).sin())
            .sum();
        self.rabi_scale * sum
    }

    /// `w2(τ) = -½ dr/dτ` in units of ξ.
    pub fn w2_at(&self, tau: f64) -> f64 {
        let sum: f64 = self
            .sine_harmonics
            .iter()
            .map(|h| h.coeff * h.order as f64 * (h.order as f64 * tau).cos())
            .sum();
        -0.5 * self.rabi_scale * sum
    }

    /// `w1(t)` in rad/s.
    pub fn eval_w1(&self, t: f64) -> Complex64 {
        self.w1_at(self.xi * t) * self.xi
    }

    /// `(r(t), w2(t))` with `w2` in rad/s.
    pub fn eval_r_w2(&self, t: f64) -> (f64, f64) {
        let tau = self.xi * t;
        (self.r_at(tau), self.w2_at(tau) * self.xi)
    }

    /// Same drive with every coefficient multiplied by an extra factor.
    pub fn scaled(&self, factor: f64) -> DriveSpec {
        DriveSpec {
            rabi_scale: self.rabi_scale * factor,
            ..self.clone()
        }
    }

    /// Applies a quasi-static error. Returns the perturbed drive and the
    /// effective gate duration in seconds. Detuning is left to the oracle.
    pub fn apply_error(&self, err: &ErrorModel) -> (DriveSpec, f64) {
        (
            self.scaled(1.0 + err.delta_omega_rel),
            self.period() * (1.0 + err.delta_t_rel),
        )
    }

    /// Whether the drive has any squeezing content.
    pub fn has_squeezing(&self) -> bool {
        self.sine_harmonics.iter().any(|h| h.coeff != 0.0)
    }

    /// Checks the linear endpoint and mean-displacement constraints directly
    /// from the coefficients.
    pub fn validate_spectral_family(&self) -> ValidationReport {
        let lambda = self.rabi_scale;
        let sum_a = lambda * self.odd_harmonics.iter().map(|h| h.coeff).sum::<f64>();
        let sum_a_over_k = lambda
            * self
                .odd_harmonics
                .iter()
                .map(|h| h.coeff / h.order as f64)
                .sum::<f64>();
        // Σ n s_{2n} with k = 2n.
        let sum_n_s = lambda
            * self
                .sine_harmonics
                .iter()
                .map(|h| 0.5 * h.order as f64 * h.coeff)
                .sum::<f64>();
        let scale_a = lambda.abs()
            * self
                .odd_harmonics
                .iter()
                .map(|h| h.coeff.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
        let scale_s = lambda.abs()
            * self
                .sine_harmonics
                .iter()
                .map(|h| 0.5 * h.order as f64 * h.coeff.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
        let check = |name: &'static str, residual: f64, scale: f64| LinearConstraint {
            name,
            residual,
            holds: residual.abs() <= 1e-12 * scale.max(1.0),
        };
        ValidationReport {
            w1_endpoints: check("w1(0) = w1(T) = 0", sum_a, scale_a),
            w2_endpoints: check("w2(0) = w2(T) = 0", sum_n_s, scale_s),
            mean_displacement: check("{alpha} = 0 (leading order in r)", sum_a_over_k, scale_a),
        }
    }
}

fn check_series(series: &[Harmonic], name: &str, parity: impl Fn(u32) -> bool) -> Result<()> {
    let mut seen = Vec::with_capacity(series.len());
    for h in series {
        if h.order == 0 || h.order > MAX_HARMONIC || !parity(h.order) {
            return Err(Error::InvalidDrive(format!("{name}: harmonic {} not allowed", h.order)));
        }
        if !h.coeff.is_finite() {
            return Err(Error::InvalidDrive(format!("{name}: non-finite coefficient at harmonic {}", h.order)));
        }
        if seen.contains(&h.order) {
            return Err(Error::InvalidDrive(format!("{name}: harmonic {} repeated", h.order)));
        }
        seen.push(h.order);
    }
    Ok(())
}

/// Quasi-static deviations from the nominal gate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// δΩ/Ω
    pub delta_omega_rel: f64,
    /// δT/T
    pub delta_t_rel: f64,
    /// δν/ξ
    pub delta_nu_over_xi: f64,
}

impl ErrorModel {
    pub fn rabi(delta: f64) -> Self {
        ErrorModel {
            delta_omega_rel: delta,
            ..Default::default()
        }
    }

    pub fn timing(delta: f64) -> Self {
        ErrorModel {
            delta_t_rel: delta,
            ..Default::default()
        }
    }

    pub fn detuning(delta: f64) -> Self {
        ErrorModel {
            delta_nu_over_xi: delta,
            ..Default::default()
        }
    }

    /// Effective gate duration in units of 1/ξ.
    pub fn tau_end(&self) -> f64 {
        TAU * (1.0 + self.delta_t_rel)
    }

    pub fn is_finite(&self) -> bool {
        self.delta_omega_rel.is_finite() && self.delta_t_rel.is_finite() && self.delta_nu_over_xi.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraint {
    pub name: &'static str,
    pub residual: f64,
    pub holds: bool,
}

/// Additional (linear) robustness constraints of a drive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Σ a_k
    pub w1_endpoints: LinearConstraint,
    /// Σ n s_{2n}
    pub w2_endpoints: LinearConstraint,
    /// Σ a_k / k
    pub mean_displacement: LinearConstraint,
}

impl ValidationReport {
    pub fn constraints(&self) -> [&LinearConstraint; 3] {
        [&self.w1_endpoints, &self.w2_endpoints, &self.mean_displacement]
    }

    pub fn all_hold(&self) -> bool {
        self.constraints().iter().all(|c| c.holds)
    }
}

/// Built-in drive profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Harmonics 3, 5, 7 and 2, 4 with the linear robustness constraints.
    Robust,
    /// Only `a_3` and `s_2`.
    Minimal,
    /// Single-tone Mølmer–Sørensen reference, no squeezing.
    Ms,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robust" => Ok(Profile::Robust),
            "minimal" => Ok(Profile::Minimal),
            "ms" => Ok(Profile::Ms),
            other => Err(Error::InvalidArgument(format!("unknown profile kind '{other}'"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Profile::Robust => "robust",
            Profile::Minimal => "minimal",
            Profile::Ms => "ms",
        })
    }
}

/// Robust drive shape for free amplitudes `(a, s)`:
/// `w1 = a/3 (3e^{3iτ} - 10e^{5iτ} + 7e^{7iτ})`, `r = s (sin 2τ - ½ sin 4τ)`.
pub fn robust_drive(xi: f64, a: f64, s: f64) -> Result<DriveSpec> {
    DriveSpec::new(
        xi,
        vec![
            Harmonic::new(3, a),
            Harmonic::new(5, -10.0 / 3.0 * a),
            Harmonic::new(7, 7.0 / 3.0 * a),
        ],
        vec![Harmonic::new(2, s), Harmonic::new(4, -0.5 * s)],
    )
}

/// Minimal drive: `w1 = a3 e^{3iτ}`, `r = s2 sin 2τ`.
pub fn minimal_drive(xi: f64, a3: f64, s2: f64) -> Result<DriveSpec> {
    DriveSpec::new(xi, vec![Harmonic::new(3, a3)], vec![Harmonic::new(2, s2)])
}

/// Single-tone drive at the fundamental with no squeezing.
pub fn ms_drive(xi: f64, a1: f64) -> Result<DriveSpec> {
    DriveSpec::new(xi, vec![Harmonic::new(1, a1)], Vec::new())
}

/// One of the built-in reference drives, with the published amplitudes.
pub fn make_profile(kind: Profile, xi: f64) -> Result<DriveSpec> {
    match kind {
        Profile::Robust => robust_drive(xi, ROBUST_A, ROBUST_S),
        Profile::Minimal => minimal_drive(xi, MINIMAL_A3, MINIMAL_S2),
        // Φ2(T) = -2π a1² = -π/2
        Profile::Ms => ms_drive(xi, 0.5),
    }
}
