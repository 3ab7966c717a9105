//! Bogoliubov squeezing parameters (r, θ) that remove the quadratic
//! squeezing terms from the resonator Hamiltonian.
//!
//! With Δ = ω_r′ + S − ω_p and ψ = arg Υ − 2θ, the conditions read
//!
//! ```text
//! cos ψ =  Δ tanh(2r) / (2|Υ|)
//! sin ψ = −κ sinh(2r) / (4|Υ|)
//! ```
//!
//! Squaring and adding leaves Δ²u²/(4(1+u²)) + κ²u²/16 = |Υ|² in u = sinh 2r,
//! strictly increasing in u, so the root is bracketed by [0, 4|Υ|/κ] and found
//! by bisection.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersive::{shifted_resonator_frequency, DispersiveQuantities};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingSolution {
    pub r: f64,
    /// Squeezing angle Θ at t = 0 (rad), in (−π/2, π/2].
    pub theta: f64,
    pub r_max: f64,
    /// Effective thermal occupation sinh²r.
    pub n_th: f64,
    /// Δ̃_r = Δ / cosh 2r (rad/s).
    pub delta_r_tilde: f64,
    /// Unscaled detuning Δ = ω_r′ + S − ω_p (rad/s).
    pub detuning: f64,
    pub upsilon: Complex64,
    /// |left-hand side| of the squeezing condition at (r, θ).
    pub residual: f64,
}

/// Largest achievable squeezing ½ asinh(4|Υ|/κ).
pub fn r_max(upsilon: Complex64, kappa: f64) -> f64 {
    0.5 * (4.0 * upsilon.norm() / kappa).asinh()
}

/// Complex left-hand side of the squeezing condition.
pub fn squeezing_condition(upsilon: Complex64, detuning: f64, kappa: f64, r: f64, theta: f64) -> Complex64 {
    let (s2, c) = ((2.0 * r).sinh(), r.cosh());
    let sh = r.sinh();
    let rot = Complex64::from_polar(1.0, -2.0 * theta);
    Complex64::new(-detuning * s2 / 2.0, kappa * s2 / 4.0) + upsilon * rot * c * c + upsilon.conj() * rot.conj() * sh * sh
}

/// Solves the squeezing conditions for given Υ, Δ and κ.
pub fn squeeze(upsilon: Complex64, detuning: f64, kappa: f64) -> Result<SqueezingSolution> {
    if !(kappa > 0.0) || !detuning.is_finite() || !upsilon.re.is_finite() || !upsilon.im.is_finite() {
        return Err(Error::NoSqueezingSolution(format!(
            "non-finite input (Υ = {upsilon}, Δ = {detuning}, κ = {kappa})"
        )));
    }
    let y = upsilon.norm();
    let r_max = r_max(upsilon, kappa);
    if y == 0.0 {
        return Ok(SqueezingSolution {
            r: 0.0,
            theta: 0.0,
            r_max,
            n_th: 0.0,
            delta_r_tilde: detuning,
            detuning,
            upsilon,
            residual: 0.0,
        });
    }

    let h = |u: f64| detuning * detuning * u * u / (4.0 * (1.0 + u * u)) + kappa * kappa * u * u / 16.0 - y * y;
    let (mut lo, mut hi) = (0.0, 4.0 * y / kappa);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let r = (0.5 * u.asinh()).min(r_max);
    let cos_psi = detuning * (2.0 * r).tanh() / (2.0 * y);
    let sin_psi = -kappa * (2.0 * r).sinh() / (4.0 * y);
    let psi = sin_psi.atan2(cos_psi);
    let mut theta = 0.5 * (upsilon.arg() - psi);
    while theta <= -PI / 2.0 {
        theta += PI;
    }
    while theta > PI / 2.0 {
        theta -= PI;
    }
    Ok(SqueezingSolution {
        r,
        theta,
        r_max,
        n_th: r.sinh().powi(2),
        delta_r_tilde: detuning / (2.0 * r).cosh(),
        detuning,
        upsilon,
        residual: squeezing_condition(upsilon, detuning, kappa, r, theta).norm(),
    })
}

/// Squeezing for qubit state `state`, using its Υ and cavity pull.
///
/// The standard model applies the ground-state result to every qubit state;
/// passing another state gives the state-resolved variant.
pub fn solve_squeezing(
    params: &SystemParams,
    disp: &DispersiveQuantities,
    state: usize,
    omega_p: f64,
) -> Result<SqueezingSolution> {
    let omega_r_shifted = shifted_resonator_frequency(params, disp.pump_photons[state]);
    squeeze(disp.upsilon[state], omega_r_shifted + disp.pull[state] - omega_p, params.kappa)
}

/// Temperature (K) whose Bose occupation at angular frequency `omega` equals `n_th`.
pub fn effective_temperature(n_th: f64, omega: f64) -> f64 {
    if n_th <= 0.0 {
        return 0.0;
    }
    HBAR * omega / (K_B * (1.0 / n_th).ln_1p())
}
