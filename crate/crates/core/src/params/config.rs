//! TOML scenario files.
//!
//! ```toml
//! [resonator]
//! omega_r = "6451.06 MHz"
//! kerr = "-0.45 MHz"
//! kerr_prime = "0 MHz"        # optional
//! kappa = "2.6 MHz"
//!
//! [qubit]
//! gamma_down = "0.08 MHz"
//! gamma_phi = "0.05 MHz"
//! sideband_correction = 2.0   # optional, defaults to 1.0
//!
//! [[qubit.levels]]
//! omega = "0 GHz"
//! g = "45 MHz"                # every level except the top one
//! epsilon = 0.0
//!
//! [[drives]]
//! kind = "pump"               # or "spectroscopy"
//! frequency = "6439 MHz"
//! amplitude = "4 MHz"
//! phase = 0.0                 # optional, radians
//! amplitude_imag = "0 MHz"    # optional, exclusive with phase
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::units::{format_quantity, parse_quantity};
use super::{DriveKind, DriveSpec, Level, Scenario, SystemParams};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    resonator: RawResonator,
    qubit: RawQubit,
    drives: Vec<RawDrive>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonator {
    omega_r: String,
    kerr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kerr_prime: Option<String>,
    kappa: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    gamma_down: String,
    gamma_phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sideband_correction: Option<f64>,
    levels: Vec<RawLevel>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    omega: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<String>,
    epsilon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    kind: DriveKind,
    frequency: String,
    amplitude: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude_imag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<f64>,
}

fn field(name: &str, text: &str) -> Result<f64> {
    parse_quantity(text).map_err(|e| Error::Config(format!("{name}: {e}")))
}

/// Parses and validates a scenario. Frequencies are converted to rad/s.
pub fn load_scenario(config_text: &str) -> Result<Scenario> {
    let raw: RawScenario =
        toml::from_str(config_text).map_err(|e| Error::Config(e.message().to_string()))?;

    let levels = raw
        .qubit
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            Ok(Level {
                omega: field(&format!("levels[{i}].omega"), &l.omega)?,
                coupling: l
                    .g
                    .as_deref()
                    .map(|g| field(&format!("levels[{i}].g"), g))
                    .transpose()?,
                epsilon: l.epsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let params = SystemParams {
        omega_r: field("omega_r", &raw.resonator.omega_r)?,
        kerr: field("kerr", &raw.resonator.kerr)?,
        kerr_prime: raw
            .resonator
            .kerr_prime
            .as_deref()
            .map(|k| field("kerr_prime", k))
            .transpose()?
            .unwrap_or(0.0),
        kappa: field("kappa", &raw.resonator.kappa)?,
        levels,
        gamma_down: field("gamma_down", &raw.qubit.gamma_down)?,
        gamma_phi: field("gamma_phi", &raw.qubit.gamma_phi)?,
        sideband_correction: raw.qubit.sideband_correction.unwrap_or(1.0),
    };

    let drives = raw
        .drives
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let re = field(&format!("drives[{i}].amplitude"), &d.amplitude)?;
            let amplitude = match (&d.amplitude_imag, d.phase) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!(
                        "drives[{i}]: amplitude_imag and phase are mutually exclusive"
                    )))
                }
                (Some(im), None) => Complex64::new(re, field(&format!("drives[{i}].amplitude_imag"), im)?),
                (None, Some(phase)) => Complex64::from_polar(re, phase),
                (None, None) => Complex64::new(re, 0.0),
            };
            Ok(DriveSpec {
                amplitude,
                frequency: field(&format!("drives[{i}].frequency"), &d.frequency)?,
                kind: d.kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Scenario::new(params, drives)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())?;
    load_scenario(&text)
}

/// Writes a scenario back out in rad/s. Loading the result yields an equal scenario.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let p = &scenario.params;
    let raw = RawScenario {
        resonator: RawResonator {
            omega_r: format_quantity(p.omega_r),
            kerr: format_quantity(p.kerr),
            kerr_prime: Some(format_quantity(p.kerr_prime)),
            kappa: format_quantity(p.kappa),
        },
        qubit: RawQubit {
            gamma_down: format_quantity(p.gamma_down),
            gamma_phi: format_quantity(p.gamma_phi),
            sideband_correction: Some(p.sideband_correction),
            levels: p
                .levels
                .iter()
                .map(|l| RawLevel {
                    omega: format_quantity(l.omega),
                    g: l.coupling.map(format_quantity),
                    epsilon: l.epsilon,
                })
                .collect(),
        },
        drives: scenario
            .drives
            .iter()
            .map(|d| RawDrive {
                kind: d.kind,
                frequency: format_quantity(d.frequency),
                amplitude: format_quantity(d.amplitude.re),
                amplitude_imag: Some(format_quantity(d.amplitude.im)),
                phase: None,
            })
            .collect(),
    };
    toml::to_string(&raw).expect("scenario serializes")
}
