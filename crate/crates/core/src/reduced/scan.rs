//! P(|1⟩) over a grid of spectroscopy frequencies and pump amplitudes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate_point, ModelOptions};
use crate::params::{DriveSpec, SystemParams};
use crate::semiclassical::{Branch, BranchHint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub model: ModelOptions,
    pub branch: BranchHint,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            model: ModelOptions::default(),
            branch: BranchHint::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub omega_s: f64,
    /// NaN when the model failed at this point.
    pub p1: f64,
    pub branch: Option<Branch>,
    pub r: f64,
    pub delta_r_tilde: f64,
    pub omega10_ddd: f64,
    pub error: Option<String>,
}

/// Pump-only quantities of one column (spectroscopy amplitude set to zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub branch: Branch,
    pub photons: f64,
    pub r: f64,
    pub theta: f64,
    pub n_th: f64,
    pub delta_r_tilde: f64,
    pub omega10_ddd: f64,
    pub upsilon: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumColumn {
    /// |ε_p| (rad/s).
    pub pump_amplitude: f64,
    pub points: Vec<SpectrumPoint>,
    pub summary: Option<ColumnSummary>,
    /// Number of points where the model failed.
    pub failures: usize,
}

impl SpectrumColumn {
    pub fn p1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumScan {
    pub omega_s: Vec<f64>,
    pub columns: Vec<SpectrumColumn>,
}

impl SpectrumScan {
    pub fn pump_amplitudes(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.pump_amplitude).collect()
    }
}

fn column(
    params: &SystemParams,
    pump: &DriveSpec,
    spectroscopy: &DriveSpec,
    omega_s: &[f64],
    options: &ScanOptions,
) -> SpectrumColumn {
    let mid = omega_s.get(omega_s.len() / 2).copied().unwrap_or(spectroscopy.frequency);
    let quiet = spectroscopy.with_amplitude(0.0).with_frequency(mid);
    let summary = evaluate_point(params, pump, &quiet, options.branch, &options.model)
        .ok()
        .map(|pt| ColumnSummary {
            branch: pt.pointer.branch,
            photons: pt.pointer.pump_photons(0),
            r: pt.squeezing.r,
            theta: pt.squeezing.theta,
            n_th: pt.squeezing.n_th,
            delta_r_tilde: pt.squeezing.delta_r_tilde,
            omega10_ddd: pt.dispersive.omega10_ddd(),
            upsilon: pt.squeezing.upsilon,
        });

    let points: Vec<SpectrumPoint> = omega_s
        .iter()
        .map(|&ws| match evaluate_point(params, pump, &spectroscopy.with_frequency(ws), options.branch, &options.model) {
            Ok(pt) => SpectrumPoint {
                omega_s: ws,
                p1: pt.p1,
                branch: Some(pt.pointer.branch),
                r: pt.squeezing.r,
                delta_r_tilde: pt.squeezing.delta_r_tilde,
                omega10_ddd: pt.dispersive.omega10_ddd(),
                error: None,
            },
            Err(e) => SpectrumPoint {
                omega_s: ws,
                p1: f64::NAN,
                branch: None,
                r: f64::NAN,
                delta_r_tilde: f64::NAN,
                omega10_ddd: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let failures = points.iter().filter(|p| p.error.is_some()).count();
    SpectrumColumn {
        pump_amplitude: pump.amplitude.norm(),
        points,
        summary,
        failures,
    }
}

/// Evaluates the full model on every (ω_s, |ε_p|) pair. The pump keeps the
/// phase of `pump.amplitude`. Columns run in parallel; failed points are
/// recorded with their error rather than dropped.
pub fn spectrum_scan(
    params: &SystemParams,
    pump: &DriveSpec,
    spectroscopy: &DriveSpec,
    omega_s: &[f64],
    pump_amplitudes: &[f64],
    options: &ScanOptions,
) -> SpectrumScan {
    let phase = if pump.amplitude.norm() > 0.0 {
        pump.amplitude / pump.amplitude.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let columns = pump_amplitudes
        .par_iter()
        .map(|&amp| column(params, &pump.with_amplitude(phase * amp), spectroscopy, omega_s, options))
        .collect();
    SpectrumScan {
        omega_s: omega_s.to_vec(),
        columns,
    }
}
