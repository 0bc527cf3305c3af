//! Gate fidelity under quasi-static errors, error scans and the
//! infidelity scaling exponent.
//!
//! The closed form starts from `|00;0⟩ = ½(|++⟩ + |+-⟩ + |-+⟩ + |--⟩)|0⟩`:
//!
//! `F = |½ + ¼ e^{-iχ₊} O₊ + ¼ e^{-iχ₋} O₋|²`, `χ± = (Φ2 + Φ4 - φ) ± Φ3`,
//!
//! where `O± = ⟨0|D(±γ±) S(±r)|0⟩ = exp[-½|γ±|² ∓ ½ conj(γ±)² tanh r] / √cosh r`.
//! Rabi and timing errors are exact in this form; motional detuning makes
//! `w2` complex and is only available through the oracle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::designer::GateDesign;
use crate::drive::{DriveSpec, ErrorModel};
use crate::error::{Error, Result};
use crate::functionals::{phase_functionals, PhaseFunctionals};
use crate::oracle::{numeric_fidelity, FockConfig};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed_form" => Ok(Method::ClosedForm),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityResult {
    pub fidelity: f64,
    pub error_point: ErrorModel,
    pub method: Method,
    /// Functionals at the effective gate time (closed form only).
    pub functionals: Option<PhaseFunctionals>,
}

impl FidelityResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// `⟨0|D(β) S(ζ)|0⟩` for real squeezing `ζ`.
pub fn squeezed_vacuum_overlap(beta: Complex64, zeta: f64) -> Complex64 {
    let exponent = -0.5 * beta.norm_sqr() - 0.5 * beta.conj() * beta.conj() * zeta.tanh();
    exponent.exp() / zeta.cosh().sqrt()
}

/// Closed-form fidelity from the functionals at the effective gate time.
pub fn fidelity_from_functionals(pf: &PhaseFunctionals, target_phase: f64) -> f64 {
    let chi = pf.entangling_phase() - target_phase;
    let plus = squeezed_vacuum_overlap(pf.gamma_plus, pf.r);
    // Branch -1 is displaced by -γ₋ and squeezed by -r; the sign of β drops out.
    let minus = squeezed_vacuum_overlap(pf.gamma_minus, -pf.r);
    let amplitude = 0.5 + 0.25 * Complex64::from_polar(1.0, -(chi + pf.phi3)) * plus + 0.25 * Complex64::from_polar(1.0, -(chi - pf.phi3)) * minus;
    amplitude.norm_sqr()
}

pub fn closed_form_fidelity_for(spec: &DriveSpec, target_phase: f64, err: &ErrorModel, cfg: &QuadratureConfig) -> Result<FidelityResult> {
    if err.delta_nu_over_xi != 0.0 {
        return Err(Error::DetuningRequiresOracle);
    }
    if !err.is_finite() || err.tau_end() < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid error point {err:?}")));
    }
    let scaled = spec.scaled(1.0 + err.delta_omega_rel);
    let pf = phase_functionals(&scaled, err.tau_end(), cfg)?;
    Ok(FidelityResult {
        fidelity: fidelity_from_functionals(&pf, target_phase),
        error_point: *err,
        method: Method::ClosedForm,
        functionals: Some(pf),
    })
}

pub fn closed_form_fidelity(design: &GateDesign, err: &ErrorModel, cfg: &QuadratureConfig) -> Result<FidelityResult> {
    closed_form_fidelity_for(&design.spec, design.target_phase, err, cfg)
}

/// Which error a scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorAxis {
    /// δΩ/Ω
    Rabi,
    /// δT/T
    Timing,
    /// δν/ξ
    Detuning,
}

impl ErrorAxis {
    pub fn error_model(self, value: f64) -> ErrorModel {
        match self {
            ErrorAxis::Rabi => ErrorModel::rabi(value),
            ErrorAxis::Timing => ErrorModel::timing(value),
            ErrorAxis::Detuning => ErrorModel::detuning(value),
        }
    }
}

impl FromStr for ErrorAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rabi" => Ok(ErrorAxis::Rabi),
            "timing" => Ok(ErrorAxis::Timing),
            "detuning" => Ok(ErrorAxis::Detuning),
            other => Err(Error::InvalidArgument(format!("unknown error axis '{other}'"))),
        }
    }
}

impl fmt::Display for ErrorAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorAxis::Rabi => "rabi",
            ErrorAxis::Timing => "timing",
            ErrorAxis::Detuning => "detuning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub error_value: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub axis: ErrorAxis,
    pub method: Method,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub const CSV_HEADER: &'static str = "error_axis,error_value,fidelity,method";

    /// Writes the table as CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for row in &self.rows {
            writeln!(out, "{},{:.16e},{:.16e},{}", self.axis, row.error_value, row.fidelity, self.method)?;
        }
        Ok(())
    }

    /// The row with the highest fidelity.
    pub fn peak(&self) -> Option<ScanRow> {
        self.rows.iter().copied().max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
    }
}

/// Numerical settings shared by every scan point.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanSettings {
    pub quadrature: QuadratureConfig,
    pub fock: FockConfig,
}

/// Fidelity on a uniform grid of `n_points` error values over `range`.
/// Points are evaluated in parallel; each one is independent, so the table
/// does not depend on the thread count.
pub fn scan(design: &GateDesign, axis: ErrorAxis, range: (f64, f64), n_points: usize, method: Method, settings: &ScanSettings) -> Result<ScanTable> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("a scan needs at least two points".into()));
    }
    if !(range.0.is_finite() && range.1.is_finite()) {
        return Err(Error::InvalidArgument("scan range must be finite".into()));
    }
    if axis == ErrorAxis::Detuning && method == Method::ClosedForm {
        return Err(Error::DetuningRequiresOracle);
    }
    let step = (range.1 - range.0) / (n_points - 1) as f64;
    let rows = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let value = if k + 1 == n_points { range.1 } else { range.0 + step * k as f64 };
            let err = axis.error_model(value);
            let result = match method {
                Method::ClosedForm => closed_form_fidelity(design, &err, &settings.quadrature)?,
                Method::Oracle => numeric_fidelity(design, &err, &settings.fock, 0)?,
            };
            Ok(ScanRow {
                error_value: value,
                fidelity: result.fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { axis, method, rows })
}

/// Least-squares slope of `log(1 - F)` against `log(error)` over the rows
/// with `window.0 ≤ error ≤ window.1`.
pub fn scaling_exponent(table: &ScanTable, window: (f64, f64)) -> Result<f64> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::InvalidArgument("fit window must lie on the positive error half".into()));
    }
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.error_value >= window.0 && r.error_value <= window.1)
        .map(|r| (r.error_value, 1.0 - r.fidelity))
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidArgument("fit window holds fewer than two points".into()));
    }
    if points.iter().any(|&(_, inf)| !(inf >= 1e-14)) {
        return Err(Error::NumericallyFlat);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{make_profile, Profile};
    use crate::functionals::TARGET_PHASE;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn design(kind: Profile) -> GateDesign {
        GateDesign::unrefined(make_profile(kind, 1.0).unwrap(), TARGET_PHASE)
    }

    #[test]
    fn overlap_formula_limits() {
        assert_abs_diff_eq!(squeezed_vacuum_overlap(Complex64::default(), 0.0).re, 1.0);
        let beta = Complex64::new(0.4, 0.1);
        assert_abs_diff_eq!(squeezed_vacuum_overlap(beta, 0.0).re, (-0.5 * beta.norm_sqr()).exp(), epsilon = 1e-15);
        // Squeezed vacuum ⟨0|S(r)|0⟩ = 1/√cosh r.
        assert_abs_diff_eq!(squeezed_vacuum_overlap(Complex64::default(), 0.8).re, 1.0 / 0.8f64.cosh().sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ms_infidelity_is_quadratic() {
        // Φ2 = -π/2 (1+ε)², no residual displacement: F = |½ + ½ e^{-iπ/2 (2ε+ε²)}|².
        let d = design(Profile::Ms);
        for eps in [0.01, 0.05, -0.03] {
            let f = closed_form_fidelity(&d, &ErrorModel::rabi(eps), &QuadratureConfig::default()).unwrap();
            let x = PI / 2.0 * (2.0 * eps + eps * eps);
            let expected = (0.5 + 0.5 * Complex64::from_polar(1.0, x)).norm_sqr();
            assert_abs_diff_eq!(f.fidelity, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn detuning_needs_oracle() {
        let d = design(Profile::Robust);
        assert!(matches!(
            closed_form_fidelity(&d, &ErrorModel::detuning(0.01), &QuadratureConfig::default()),
            Err(Error::DetuningRequiresOracle)
        ));
        assert!(matches!(
            scan(&d, ErrorAxis::Detuning, (-0.1, 0.1), 3, Method::ClosedForm, &ScanSettings::default()),
            Err(Error::DetuningRequiresOracle)
        ));
    }

    #[test]
    fn zero_width_scan_repeats() {
        let d = design(Profile::Minimal);
        let table = scan(&d, ErrorAxis::Rabi, (0.03, 0.03), 4, Method::ClosedForm, &ScanSettings::default()).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.rows.iter().all(|r| r == &table.rows[0]));
    }

    #[test]
    fn synthetic_quartic_exponent() {
        let rows = (1..=10)
            .map(|k| {
                let e = 0.01 * k as f64;
                ScanRow { error_value: e, fidelity: 1.0 - e.powi(4) }
            })
            .collect();
        let table = ScanTable { axis: ErrorAxis::Rabi, method: Method::ClosedForm, rows };
        assert_abs_diff_eq!(scaling_exponent(&table, (0.01, 0.1)).unwrap(), 4.0, epsilon = 1e-6);
    }

    #[test]
    fn flat_window_is_rejected() {
        let rows = vec![
            ScanRow { error_value: 0.01, fidelity: 1.0 },
            ScanRow { error_value: 0.02, fidelity: 1.0 },
        ];
        let table = ScanTable { axis: ErrorAxis::Rabi, method: Method::ClosedForm, rows };
        assert!(matches!(scaling_exponent(&table, (0.01, 0.1)), Err(Error::NumericallyFlat)));
    }

    #[test]
    fn csv_layout() {
        let table = ScanTable {
            axis: ErrorAxis::Timing,
            method: Method::ClosedForm,
            rows: vec![ScanRow { error_value: 0.1, fidelity: 0.9 }],
        };
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("error_axis,error_value,fidelity,method"));
        let row = lines.next().unwrap();
        assert_eq!(row, "timing,1.0000000000000001e-1,9.0000000000000002e-1,closed");
        let parsed: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 0.1);
    }

    #[test]
    fn fidelity_is_bounded() {
        let d = design(Profile::Robust);
        for k in -4..=4 {
            for j in -2..=2 {
                let err = ErrorModel { delta_omega_rel: 0.05 * k as f64, delta_t_rel: 0.05 * j as f64, delta_nu_over_xi: 0.0 };
                let f = closed_form_fidelity(&d, &err, &QuadratureConfig::default()).unwrap().fidelity;
                assert!((0.0..=1.0 + 1e-12).contains(&f), "{err:?}: {f}");
            }
        }
    }
}
