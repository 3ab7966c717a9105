//! Reduced qubit dynamics after eliminating the squeezed resonator: effective
//! rates, the steady-state excitation probability P(|1⟩) and its sideband
//! structure.
//!
//! Sign convention for the sidebands: with δ = ω_{1,0}‴ − ω_s, the rate
//! γ̃↑ peaks at δ = −Δ̃_r with weight (1 + sinh²r) and at δ = +Δ̃_r with weight
//! sinh²r. The weak line therefore sits at ω_s = ω_{1,0}‴ − Δ̃_r, above the main
//! line (blue) when Δ̃_r < 0.

mod scan;

pub use scan::{spectrum_scan, ColumnSummary, ScanOptions, SpectrumColumn, SpectrumPoint, SpectrumScan};

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::dispersive::{field_dispersives, stark_tables, DispersiveOptions, DispersiveQuantities};
use crate::error::{Error, Result};
use crate::params::{DriveSpec, SystemParams};
use crate::semiclassical::{
    distinguishability, measurement_dephasing, solve_pointer_states, BranchHint, PointerOptions, PointerSolution,
};
use crate::squeezing::{solve_squeezing, SqueezingSolution};

/// Resonator response function f(ω) = (κ/2 + i[Δ̃_r + ω]) / (κ²/4 + [Δ̃_r + ω]²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFunction {
    pub kappa: f64,
    pub delta_r_tilde: f64,
}

impl SpectralFunction {
    pub fn f(&self, omega: f64) -> Complex64 {
        let x = self.delta_r_tilde + omega;
        Complex64::new(self.kappa / 2.0, x) / (self.kappa * self.kappa / 4.0 + x * x)
    }

    /// L(ω) = Re f(ω).
    pub fn lorentzian(&self, omega: f64) -> f64 {
        self.f(omega).re
    }
}

pub fn spectral_f(sf: &SpectralFunction, omega: f64) -> Complex64 {
    sf.f(omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedRates {
    pub gamma_down_tilde: f64,
    pub gamma_up_tilde: f64,
    pub gamma_phi_tilde: f64,
    pub gamma2_tilde: f64,
    pub delta_tilde: f64,
    /// Sideband coefficient c, including the configured correction factor.
    pub c_coef: Complex64,
    /// δ = ω_{1,0}‴ − ω_s.
    pub delta: f64,
    /// g₀α_{s,0}.
    pub drive: Complex64,
}

/// Everything the reduced rates depend on besides δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandModel {
    pub spectral: SpectralFunction,
    /// sinh²r.
    pub n_th: f64,
    /// g₀α_{s,0}.
    pub drive: Complex64,
    /// Sideband coefficient c (already scaled by the correction factor).
    pub c: Complex64,
    /// γ↓‴ = γ + λ₀²κ.
    pub gamma_down: f64,
    /// γ_φ‴ = γ_φ + Γ_φm.
    pub gamma_phi: f64,
}

impl SidebandModel {
    /// |g₀α_{s,0}c|².
    pub fn strength(&self) -> f64 {
        (self.drive * self.c).norm_sqr()
    }

    pub fn rates(&self, delta: f64) -> ReducedRates {
        let a = self.strength();
        let s = self.n_th;
        let sf = &self.spectral;
        let (lp, lm) = (sf.lorentzian(delta), sf.lorentzian(-delta));
        let gamma_down_tilde = self.gamma_down + a * ((lm + lp) * s + lm);
        let gamma_up_tilde = a * ((lm + lp) * s + lp);
        // Im[S↓(δ) − S↑(−δ)]
        let shift = a * (1.0 + 2.0 * s) * (sf.f(delta).im - sf.f(-delta).im);
        ReducedRates {
            gamma_down_tilde,
            gamma_up_tilde,
            gamma_phi_tilde: self.gamma_phi,
            gamma2_tilde: self.gamma_phi + 0.5 * (gamma_up_tilde + gamma_down_tilde),
            delta_tilde: delta + shift,
            c_coef: self.c,
            delta,
            drive: self.drive,
        }
    }

    pub fn p1(&self, delta: f64) -> f64 {
        steady_state_p1(&self.rates(delta))
    }
}

/// Builds the sideband model from the solved pointer states, dispersive
/// quantities and squeezing.
pub fn sideband_model(
    params: &SystemParams,
    disp: &DispersiveQuantities,
    sqz: &SqueezingSolution,
    sol: &PointerSolution,
) -> Result<SidebandModel> {
    let pump = sol
        .drive_index(true)
        .ok_or_else(|| Error::InvalidParams("sideband model needs a pump drive".into()))?;
    let spec = sol
        .drive_index(false)
        .ok_or_else(|| Error::InvalidParams("sideband model needs a spectroscopy drive".into()))?;
    let beta = distinguishability(sol, 0)?[pump];
    let rot = Complex64::from_polar(1.0, 2.0 * sqz.theta);
    let c = params.sideband_correction * (beta * sqz.r.cosh() + beta.conj() * rot * sqz.r.sinh());
    Ok(SidebandModel {
        spectral: SpectralFunction {
            kappa: params.kappa,
            delta_r_tilde: sqz.delta_r_tilde,
        },
        n_th: sqz.n_th,
        drive: params.coupling(0) * sol.alpha[0][spec],
        c,
        gamma_down: params.gamma_down + disp.lambda_alpha[0].powi(2) * params.kappa,
        gamma_phi: params.gamma_phi + measurement_dephasing(params, sol),
    })
}

/// Reduced rates at spectroscopy frequency `omega_s`.
pub fn build_rates(
    params: &SystemParams,
    disp: &DispersiveQuantities,
    sqz: &SqueezingSolution,
    sol: &PointerSolution,
    omega_s: f64,
) -> Result<ReducedRates> {
    Ok(sideband_model(params, disp, sqz, sol)?.rates(disp.omega10_ddd() - omega_s))
}

/// Steady-state excitation probability of the driven reduced qubit.
pub fn steady_state_p1(rates: &ReducedRates) -> f64 {
    let total = rates.gamma_up_tilde + rates.gamma_down_tilde;
    if !(total > 0.0) {
        warn!("reduced qubit has no relaxation; P(|1>) set to 0");
        return 0.0;
    }
    let g2 = rates.gamma2_tilde;
    let rabi = rates.drive.norm_sqr();
    let eq = rates.gamma_up_tilde / total;
    let dt2 = rates.delta_tilde * rates.delta_tilde;
    let p = (eq * (g2 * g2 + dt2) + 2.0 * g2 * rabi / total) / (g2 * g2 + 4.0 * g2 * rabi / total + dt2);
    p.clamp(0.0, 1.0)
}

/// Ratio of the weak to the strong sideband amplitude: the full expression
/// in terms of L(±Δ̃_r), and its resolved limit sinh²r/(sinh²r + 1).
pub fn sideband_ratio(n_th: f64, sf: &SpectralFunction) -> (f64, f64) {
    let (near, far) = (sf.lorentzian(-sf.delta_r_tilde), sf.lorentzian(sf.delta_r_tilde));
    let full = ((near + far) * n_th + far) / ((near + far) * n_th + near);
    (full, n_th / (n_th + 1.0))
}

/// Options shared by every model evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelOptions {
    /// Minimum pump detuning from any qubit transition, in units of κ.
    pub resonance_guard: f64,
    pub pointer: PointerOptions,
    pub dispersive: DispersiveOptions,
    /// Qubit state whose Υ and cavity pull set the squeezing.
    pub squeezing_state: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            resonance_guard: 1.0,
            pointer: PointerOptions::default(),
            dispersive: DispersiveOptions::default(),
            squeezing_state: 0,
        }
    }
}

/// Full semi-analytical chain at one (pump, spectroscopy) setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelPoint {
    pub pointer: PointerSolution,
    pub dispersive: DispersiveQuantities,
    pub squeezing: SqueezingSolution,
    pub model: SidebandModel,
    pub rates: ReducedRates,
    pub p1: f64,
}

/// Runs pointer states → dispersive quantities → squeezing → rates → P(|1⟩).
pub fn evaluate_point(
    params: &SystemParams,
    pump: &DriveSpec,
    spectroscopy: &DriveSpec,
    hint: BranchHint,
    options: &ModelOptions,
) -> Result<ModelPoint> {
    let drives = [*pump, *spectroscopy];
    let stark = stark_tables(params, &drives, options.resonance_guard)?;
    let pointer = solve_pointer_states(params, &drives, &stark, hint, &options.pointer)?;
    let dispersive = field_dispersives(params, &pointer, &stark, options.dispersive)?;
    let squeezing = solve_squeezing(params, &dispersive, options.squeezing_state, pump.frequency)?;
    let model = sideband_model(params, &dispersive, &squeezing, &pointer)?;
    let rates = model.rates(dispersive.omega10_ddd() - spectroscopy.frequency);
    let p1 = steady_state_p1(&rates);
    Ok(ModelPoint {
        pointer,
        dispersive,
        squeezing,
        model,
        rates,
        p1,
    })
}
