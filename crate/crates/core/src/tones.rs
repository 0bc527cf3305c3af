//! Sideband tone lists for synthesising a drive on hardware.
//!
//! The first-sideband envelope `w1 = Σ a_k e^{ikξt}` maps one-to-one onto
//! tones offset by `kξ` from the first sideband. The second-sideband envelope
//! is real, `w2 = -Σ (k/2) s_k cos(kξt)`, so each cosine becomes a pair of
//! tones at `±kξ` carrying half its amplitude.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::designer::GateDesign;
use crate::error::{Error, Result};

/// Physical context of a tone export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationParams {
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Motional mode frequency in Hz.
    pub nu: f64,
    /// Qubit transition label, carried through unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0_label: Option<String>,
}

impl RealizationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be positive, got {}", self.nu)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeUnits {
    W1UnitsOfXi,
    W2UnitsOfXi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// 1 or 2.
    pub sideband_order: u8,
    /// Offset `δ` from the sideband in rad/s.
    pub offset_from_sideband: f64,
    /// Envelope amplitude `ρ` in units of ξ.
    pub amplitude: f64,
    pub amplitude_units: AmplitudeUnits,
    /// Tone frequency relative to the carrier, `order·ν - δ/2π`, in Hz.
    pub detuning_from_carrier_hz: f64,
    /// Field amplitude `(4/η) ρ ξ` or `(8/η²) ρ ξ` in rad/s.
    pub field_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneList {
    pub xi_rad_per_s: f64,
    pub realization: RealizationParams,
    pub tones: Vec<Tone>,
}

impl ToneList {
    /// `w1(τ)` in units of ξ rebuilt from the order-1 tones.
    pub fn w1_at(&self, tau: f64) -> Complex64 {
        self.tones
            .iter()
            .filter(|t| t.sideband_order == 1)
            .map(|t| Complex64::from_polar(t.amplitude, t.offset_from_sideband / self.xi_rad_per_s * tau))
            .sum()
    }

    /// `w2(τ)` in units of ξ rebuilt from the order-2 tones.
    pub fn w2_at(&self, tau: f64) -> f64 {
        self.tones
            .iter()
            .filter(|t| t.sideband_order == 2)
            .map(|t| Complex64::from_polar(t.amplitude, t.offset_from_sideband / self.xi_rad_per_s * tau))
            .sum::<Complex64>()
            .re
    }
}

pub fn export_tones(design: &GateDesign, realization: &RealizationParams) -> Result<ToneList> {
    design.spec.validate()?;
    realization.validate()?;
    let spec = &design.spec;
    let (xi, eta) = (spec.xi, realization.eta);
    let tone = |order: u8, k: f64, amplitude: f64| {
        let offset = k * xi;
        let (units, gain) = if order == 1 {
            (AmplitudeUnits::W1UnitsOfXi, 4.0 / eta)
        } else {
            (AmplitudeUnits::W2UnitsOfXi, 8.0 / (eta * eta))
        };
        Tone {
            sideband_order: order,
            offset_from_sideband: offset,
            amplitude,
            amplitude_units: units,
            detuning_from_carrier_hz: f64::from(order) * realization.nu - offset / TAU,
            field_amplitude: gain * amplitude * xi,
        }
    };

    let mut tones = Vec::new();
    for h in &spec.odd_harmonics {
        tones.push(tone(1, f64::from(h.order), spec.rabi_scale * h.coeff));
    }
    for h in &spec.sine_harmonics {
        let k = f64::from(h.order);
        let half = -0.5 * k * h.coeff * spec.rabi_scale / 2.0;
        tones.push(tone(2, -k, half));
        tones.push(tone(2, k, half));
    }
    tones.sort_by(|a, b| {
        a.sideband_order
            .cmp(&b.sideband_order)
            .then(a.offset_from_sideband.total_cmp(&b.offset_from_sideband))
    });
    Ok(ToneList {
        xi_rad_per_s: xi,
        realization: realization.clone(),
        tones,
    })
}
