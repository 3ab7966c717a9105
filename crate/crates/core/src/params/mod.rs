//! Physical parameters of the qubit–resonator system and the drives applied
//! to it.
//!
//! Every frequency-valued quantity is stored as an angular frequency in rad/s.
//! Configuration files may use Hz, kHz, MHz or GHz; conversion happens once in
//! [`load_scenario`].

mod config;
mod units;

pub use config::{load_scenario, load_scenario_file, serialize_scenario};
pub use units::{format_quantity, parse_quantity, Range};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One qubit eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Eigenfrequency ω_i (rad/s).
    pub omega: f64,
    /// Dipolar coupling g_i of the transition i → i+1 (rad/s). Absent for the
    /// top level.
    pub coupling: Option<f64>,
    /// Dephasing dispersion ε_i; ε_0 = 0 and ε_1 = 1.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_r: f64,
    /// Kerr coefficient K (rad/s), usually negative.
    pub kerr: f64,
    /// Higher-order Kerr coefficient K′ (rad/s).
    pub kerr_prime: f64,
    pub kappa: f64,
    pub levels: Vec<Level>,
    /// Qubit |1⟩ → |0⟩ decay rate γ.
    pub gamma_down: f64,
    /// Qubit pure dephasing rate γ_φ.
    pub gamma_phi: f64,
    /// Multiplier on the sideband coefficient c. 1.0 is the bare model.
    pub sideband_correction: f64,
}

impl SystemParams {
    /// Checks every invariant and returns the parameters unchanged on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, v) in [
            ("omega_r", self.omega_r),
            ("kerr", self.kerr),
            ("kerr_prime", self.kerr_prime),
            ("kappa", self.kappa),
            ("gamma_down", self.gamma_down),
            ("gamma_phi", self.gamma_phi),
            ("sideband_correction", self.sideband_correction),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return bad("kappa must be positive".into());
        }
        if self.gamma_down < 0.0 {
            return bad("gamma_down must be non-negative".into());
        }
        if self.gamma_phi < 0.0 {
            return bad("gamma_phi must be non-negative".into());
        }
        let m = self.levels.len();
        if m < 2 {
            return bad(format!("at least 2 qubit levels are required, got {m}"));
        }
        if self.levels[0].epsilon != 0.0 {
            return bad("epsilon_0 must equal 0".into());
        }
        if self.levels[1].epsilon != 1.0 {
            return bad("epsilon_1 must equal 1".into());
        }
        for (i, pair) in self.levels.windows(2).enumerate() {
            if !(pair[1].omega > pair[0].omega) {
                return bad(format!(
                    "level frequencies must be strictly increasing (level {} <= level {i})",
                    i + 1
                ));
            }
        }
        for (i, level) in self.levels.iter().enumerate() {
            if !level.omega.is_finite() || !level.epsilon.is_finite() {
                return bad(format!("level {i} has a non-finite field"));
            }
            match (i + 1 == m, level.coupling) {
                (false, None) => return bad(format!("level {i} is missing its coupling g_{i}")),
                (false, Some(g)) if !g.is_finite() => {
                    return bad(format!("coupling g_{i} must be finite"))
                }
                (true, Some(_)) => {
                    return bad(format!("top level {i} must not carry a coupling"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// g_i, zero outside 0..M-1.
    pub fn coupling(&self, i: isize) -> f64 {
        if i < 0 {
            return 0.0;
        }
        self.levels
            .get(i as usize)
            .and_then(|l| l.coupling)
            .unwrap_or(0.0)
    }

    /// Bare transition frequency ω_{i+1,i}.
    pub fn transition(&self, i: usize) -> f64 {
        self.levels[i + 1].omega - self.levels[i].omega
    }

    /// SHA-256 over the canonical serialization of the resolved parameters.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("params serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Pump,
    Spectroscopy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Complex drive amplitude ε (rad/s).
    pub amplitude: Complex64,
    /// Drive frequency (rad/s).
    pub frequency: f64,
    pub kind: DriveKind,
}

impl DriveSpec {
    pub fn pump(amplitude: impl Into<Complex64>, frequency: f64) -> Self {
        Self {
            amplitude: amplitude.into(),
            frequency,
            kind: DriveKind::Pump,
        }
    }

    pub fn spectroscopy(amplitude: impl Into<Complex64>, frequency: f64) -> Self {
        Self {
            amplitude: amplitude.into(),
            frequency,
            kind: DriveKind::Spectroscopy,
        }
    }

    pub fn is_pump(&self) -> bool {
        self.kind == DriveKind::Pump
    }

    pub fn with_amplitude(mut self, amplitude: impl Into<Complex64>) -> Self {
        self.amplitude = amplitude.into();
        self
    }

    pub fn with_frequency(mut self, frequency: f64) -> Self {
        self.frequency = frequency;
        self
    }
}

/// Reduced detuning Ω = 2(ω_r − ω_d)/κ.
pub fn reduced_detuning(params: &SystemParams, drive: &DriveSpec) -> f64 {
    2.0 * (params.omega_r - drive.frequency) / params.kappa
}

/// Critical reduced detuning √3 above which the bare Duffing response is bistable.
pub const CRITICAL_DETUNING: f64 = 1.732_050_807_568_877_2;

/// Checks the drive-list invariants: exactly one spectroscopy drive, at least
/// one pump, pairwise distinct pump frequencies.
pub fn validate_drives(drives: &[DriveSpec]) -> Result<()> {
    let spectroscopy = drives.iter().filter(|d| !d.is_pump()).count();
    if spectroscopy != 1 {
        return Err(Error::Config(format!(
            "exactly one spectroscopy drive is required, found {spectroscopy}"
        )));
    }
    let pumps: Vec<f64> = drives.iter().filter(|d| d.is_pump()).map(|d| d.frequency).collect();
    if pumps.is_empty() {
        return Err(Error::Config("at least one pump drive is required".into()));
    }
    for (i, a) in pumps.iter().enumerate() {
        for b in &pumps[i + 1..] {
            if a == b {
                return Err(Error::Config(format!(
                    "pump frequencies must be distinct ({a} rad/s repeated)"
                )));
            }
        }
    }
    for d in drives {
        if !d.frequency.is_finite() || !d.amplitude.re.is_finite() || !d.amplitude.im.is_finite() {
            return Err(Error::Config("drive fields must be finite".into()));
        }
    }
    Ok(())
}

/// A validated parameter set together with its drives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub drives: Vec<DriveSpec>,
}

impl Scenario {
    pub fn new(params: SystemParams, drives: Vec<DriveSpec>) -> Result<Self> {
        params.validate()?;
        validate_drives(&drives)?;
        if drives.iter().filter(|d| d.is_pump()).count() > 1 {
            return Err(Error::Config(
                "multiple pump drives are not supported: the squeezing frame needs a single pump".into(),
            ));
        }
        Ok(Self { params, drives })
    }

    pub fn pump(&self) -> &DriveSpec {
        self.drives.iter().find(|d| d.is_pump()).expect("validated scenario has a pump")
    }

    pub fn spectroscopy(&self) -> &DriveSpec {
        self.drives
            .iter()
            .find(|d| !d.is_pump())
            .expect("validated scenario has a spectroscopy drive")
    }

    /// Provenance hash covering parameters and drives.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn reduced_detuning_definition() {
        let p = two_level(0.0);
        assert_eq!(reduced_detuning(&p, &DriveSpec::pump(1.0, p.omega_r)), 0.0);
        let d = DriveSpec::pump(1.0, p.omega_r - p.kappa / 2.0);
        assert!((reduced_detuning(&p, &d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_outside_range_is_zero() {
        let p = three_level();
        assert_eq!(p.coupling(-1), 0.0);
        assert_eq!(p.coupling(2), 0.0);
        assert_eq!(p.coupling(7), 0.0);
        assert_eq!(p.coupling(0), 2.0);
    }

    #[test]
    fn rejects_bad_invariants() {
        let mut p = two_level(0.0);
        p.kappa = 0.0;
        assert!(p.validate().unwrap_err().to_string().contains("kappa"));

        let mut p = two_level(0.0);
        p.levels[1].epsilon = 0.9;
        assert!(p.validate().unwrap_err().to_string().contains("epsilon_1 must equal 1"));

        let mut p = three_level();
        p.levels[2].omega = 70.0;
        assert!(p.validate().unwrap_err().to_string().contains("strictly increasing"));

        let mut p = two_level(0.0);
        p.levels.pop();
        assert!(p.validate().is_err());

        let mut p = two_level(0.0);
        p.gamma_phi = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn drive_list_rules() {
        let p = DriveSpec::pump(1.0, 10.0);
        let s = DriveSpec::spectroscopy(1.0, 5.0);
        assert!(validate_drives(&[p, s]).is_ok());
        assert!(validate_drives(&[p]).is_err());
        assert!(validate_drives(&[p, s, s]).is_err());
        assert!(validate_drives(&[p, p, s]).is_err());
        assert!(validate_drives(&[p, p.with_frequency(11.0), s]).is_ok());
        // a scenario additionally restricts to a single pump
        assert!(Scenario::new(two_level(0.0), vec![p, p.with_frequency(11.0), s]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = two_level(0.0);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.kerr = -1e-3;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
