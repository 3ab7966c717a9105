//! Bare Duffing response of the resonator to a single pump, and the
//! stability diagram over (Ω, ε).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::pointer::{FieldEquation, Root};
use super::Branch;
use crate::params::{DriveSpec, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRoot {
    /// Photon number n = |α|².
    pub n: f64,
    pub alpha: Complex64,
    pub stable: bool,
    /// Branch of a stable root; `None` for the unstable middle root.
    pub branch: Option<Branch>,
}

fn bare_equation(params: &SystemParams, drive: &DriveSpec) -> FieldEquation {
    FieldEquation::new(params, std::slice::from_ref(drive), &[0.0], &[0.0])
}

/// All non-negative solutions n of n[(ω_r − ω_d + Kn + K′n²)² + κ²/4] = |ε_d|²,
/// ascending, without any qubit-induced Stark terms.
pub fn classical_response(params: &SystemParams, drive: &DriveSpec) -> Vec<ResponseRoot> {
    let eq = bare_equation(params, drive);
    eq.roots(200)
        .into_iter()
        .map(|Root { n, stable, branch }| ResponseRoot {
            n,
            alpha: eq.alpha(&[drive.amplitude], n)[0],
            stable,
            branch,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityClass {
    #[serde(rename = "L_only")]
    LOnly,
    #[serde(rename = "H_only")]
    HOnly,
    #[serde(rename = "bistable")]
    Bistable,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LOnly => "L_only",
            Self::HOnly => "H_only",
            Self::Bistable => "bistable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCell {
    pub omega_reduced: f64,
    /// |ε| in rad/s.
    pub drive_amplitude: f64,
    pub classification: StabilityClass,
}

/// Classifies a response by counting its stable roots.
pub fn classify(roots: &[ResponseRoot]) -> StabilityClass {
    let stable: Vec<&ResponseRoot> = roots.iter().filter(|r| r.stable).collect();
    match stable.as_slice() {
        [only] if only.branch == Some(Branch::H) => StabilityClass::HOnly,
        [_] | [] => StabilityClass::LOnly,
        _ => StabilityClass::Bistable,
    }
}

/// Pump drive at reduced detuning Ω with real amplitude `amplitude`.
pub fn drive_at(params: &SystemParams, omega_reduced: f64, amplitude: f64) -> DriveSpec {
    DriveSpec::pump(amplitude, params.omega_r - omega_reduced * params.kappa / 2.0)
}

/// Stability class of every (Ω, |ε|) cell, Ω-major: cell `k·len(amplitudes) + j`
/// holds `(omegas[k], amplitudes[j])`.
pub fn stability_diagram(params: &SystemParams, omegas: &[f64], amplitudes: &[f64]) -> Vec<StabilityCell> {
    omegas
        .par_iter()
        .flat_map_iter(|&omega_reduced| {
            amplitudes.iter().map(move |&amp| StabilityCell {
                omega_reduced,
                drive_amplitude: amp,
                classification: classify(&classical_response(params, &drive_at(params, omega_reduced, amp))),
            })
        })
        .collect()
}
