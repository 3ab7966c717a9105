//! Drive- and field-dependent dispersive quantities: classical Stark
//! coefficients, Lamb shift, cavity pull, shifted qubit frequencies and the
//! squeezing source Υ.
//!
//! Index convention: any symbol whose index falls outside its defined range is
//! zero. Coupling-indexed symbols (g_i, Λ_i, X_i, λ_i, χ_i) live on
//! i = 0..M-2; level-indexed ones (𝕊_i, 𝕂_i, L_i, S_i, ω_i″, ω_i‴) on 0..M-1.
//!
//! Only pump drives contribute Stark terms. The spectroscopy drive sits close
//! to a qubit transition, where the classical Stark expansion diverges; its
//! field still enters the photon number of each pointer state.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DriveSpec, SystemParams};
use crate::semiclassical::PointerSolution;

/// Classical Stark coefficients for one drive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarkTable {
    pub drive: DriveSpec,
    /// Λ_i = −g_i/(ω_{i+1,i} − ω_d), length M (top entry zero).
    pub lambda: Vec<f64>,
    /// X_i = −g_i Λ_i (rad/s), length M (top entry zero).
    pub x: Vec<f64>,
    /// 𝕊_i (rad/s), length M.
    pub s: Vec<f64>,
    /// 𝕂_i (rad/s), length M.
    pub k: Vec<f64>,
}

impl StarkTable {
    pub fn zero(drive: DriveSpec, levels: usize) -> Self {
        Self {
            drive,
            lambda: vec![0.0; levels],
            x: vec![0.0; levels],
            s: vec![0.0; levels],
            k: vec![0.0; levels],
        }
    }
}

fn at(v: &[f64], i: isize) -> f64 {
    if i < 0 {
        0.0
    } else {
        v.get(i as usize).copied().unwrap_or(0.0)
    }
}

/// Stark coefficients for a pump drive. `guard` is the minimum allowed
/// |ω_{i+1,i} − ω_d| in units of κ.
pub fn stark_coefficients(params: &SystemParams, drive: &DriveSpec, guard: f64) -> Result<StarkTable> {
    let m = params.num_levels();
    let mut lambda = vec![0.0; m];
    let mut x = vec![0.0; m];
    for i in 0..m - 1 {
        let detuning = params.transition(i) - drive.frequency;
        if detuning.abs() < guard * params.kappa {
            return Err(Error::ResonantDrive {
                level: i,
                drive_frequency: drive.frequency,
                detuning,
            });
        }
        let g = params.coupling(i as isize);
        lambda[i] = -g / detuning;
        x[i] = -g * lambda[i];
    }
    let l2 = |i: isize| at(&lambda, i).powi(2);
    let xi = |i: isize| at(&x, i);

    let s: Vec<f64> = (0..m as isize).map(|i| -(xi(i) - xi(i - 1))).collect();
    let k = (0..m as isize)
        .map(|i| {
            let si = s[i as usize];
            -4.0 * si * (l2(i) + l2(i - 1)) - (3.0 * xi(i + 1) * l2(i) - xi(i) * l2(i + 1))
                + (3.0 * xi(i - 2) * l2(i - 1) - xi(i - 1) * l2(i - 2))
        })
        .collect();

    Ok(StarkTable {
        drive: *drive,
        lambda,
        x,
        s,
        k,
    })
}

/// One table per drive, in drive order. Spectroscopy drives get zero tables.
pub fn stark_tables(params: &SystemParams, drives: &[DriveSpec], guard: f64) -> Result<Vec<StarkTable>> {
    drives
        .iter()
        .map(|d| {
            if d.is_pump() {
                stark_coefficients(params, d, guard)
            } else {
                Ok(StarkTable::zero(*d, params.num_levels()))
            }
        })
        .collect()
}

/// Mean-field Kerr-shifted resonator frequency ω_r′ = ω_r + 2Kn + 3K′n².
///
/// Kept behind one function so the definition can be swapped.
pub fn shifted_resonator_frequency(params: &SystemParams, photons: f64) -> f64 {
    params.omega_r + 2.0 * params.kerr * photons + 3.0 * params.kerr_prime * photons * photons
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersiveOptions {
    /// Largest tolerated |λ_i(α)|.
    pub lambda_limit: f64,
    /// Qubit state whose field defines ω_r′ and enters the squeezing frame.
    pub reference_state: usize,
}

impl Default for DispersiveOptions {
    fn default() -> Self {
        Self {
            lambda_limit: 0.5,
            reference_state: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersiveQuantities {
    /// Stark coefficients, one table per drive in pointer-solution order.
    pub stark: Vec<StarkTable>,
    /// λ_i(α), length M (top entry zero).
    pub lambda_alpha: Vec<f64>,
    /// χ_i(α) (rad/s), length M (top entry zero).
    pub chi_alpha: Vec<f64>,
    /// Lamb shift L_i = χ_{i−1}.
    pub lamb: Vec<f64>,
    /// Cavity pull S_i = −(χ_i − χ_{i−1}).
    pub pull: Vec<f64>,
    /// ω_i″: Stark-shifted level frequencies.
    pub omega_dd: Vec<f64>,
    /// ω_i‴ = ω_i″ + L_i.
    pub omega_ddd: Vec<f64>,
    /// ω_r′ evaluated on the reference state's pump field.
    pub omega_r_shifted: f64,
    /// Υ_p per qubit state (pump component).
    pub upsilon: Vec<Complex64>,
    /// Pump photon number per qubit state.
    pub pump_photons: Vec<f64>,
    pub reference_state: usize,
    /// Frequency of the pump that defines the squeezing frame.
    pub pump_frequency: f64,
}

impl DispersiveQuantities {
    /// Shifted transition frequency ω_{i+1,i}‴.
    pub fn transition_ddd(&self, i: usize) -> f64 {
        self.omega_ddd[i + 1] - self.omega_ddd[i]
    }

    pub fn omega10_ddd(&self) -> f64 {
        self.transition_ddd(0)
    }
}

/// Evaluates every field-dependent dispersive quantity on a converged
/// pointer solution.
pub fn field_dispersives(
    params: &SystemParams,
    sol: &PointerSolution,
    stark: &[StarkTable],
    options: DispersiveOptions,
) -> Result<DispersiveQuantities> {
    let m = params.num_levels();
    assert_eq!(stark.len(), sol.drives.len(), "one Stark table per drive");
    let reference = options.reference_state.min(m - 1);
    let pump = sol
        .drives
        .iter()
        .position(|d| d.is_pump())
        .ok_or_else(|| Error::InvalidParams("field dispersives need a pump drive".into()))?;

    let omega_dd: Vec<f64> = (0..m)
        .map(|i| {
            let mut w = params.levels[i].omega;
            for (d, table) in stark.iter().enumerate() {
                if !table.drive.is_pump() {
                    continue;
                }
                let n = sol.alpha[i][d].norm_sqr();
                w += table.s[i] * n + 0.25 * table.k[i] * n * n;
            }
            w
        })
        .collect();

    let omega_r_shifted = shifted_resonator_frequency(params, sol.pump_photons(reference));

    let mut lambda_alpha = vec![0.0; m];
    let mut chi_alpha = vec![0.0; m];
    for i in 0..m - 1 {
        let g = params.coupling(i as isize);
        let lam = -g / (omega_dd[i + 1] - omega_dd[i] - omega_r_shifted);
        if lam.abs() > options.lambda_limit {
            return Err(Error::DispersiveBreakdown {
                level: i,
                lambda: lam.abs(),
                limit: options.lambda_limit,
            });
        }
        lambda_alpha[i] = lam;
        chi_alpha[i] = -g * lam;
    }
    let chi = |i: isize| at(&chi_alpha, i);
    let lamb: Vec<f64> = (0..m as isize).map(|i| chi(i - 1)).collect();
    let pull: Vec<f64> = (0..m as isize).map(|i| -(chi(i) - chi(i - 1))).collect();
    let omega_ddd = omega_dd.iter().zip(&lamb).map(|(w, l)| w + l).collect();

    let upsilon = (0..m)
        .map(|i| {
            let a = sol.alpha[i][pump];
            let n = sol.pump_photons(i);
            (0.5 * params.kerr + params.kerr_prime * n) * a * a
        })
        .collect();

    Ok(DispersiveQuantities {
        stark: stark.to_vec(),
        lambda_alpha,
        chi_alpha,
        lamb,
        pull,
        omega_dd,
        omega_ddd,
        omega_r_shifted,
        upsilon,
        pump_photons: (0..m).map(|i| sol.pump_photons(i)).collect(),
        reference_state: reference,
        pump_frequency: sol.drives[pump].frequency,
    })
}
