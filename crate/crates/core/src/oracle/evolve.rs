//! Adaptive Dormand–Prince 5(4) integration of ρ̇ = ℒ(t)ρ.

use num_complex::Complex64;
use serde::Serialize;

use super::Generator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; 0 picks one from the generator norm.
    pub first_step: f64,
    pub min_step: f64,
    /// Largest trace drift tolerated at an accepted step.
    pub trace_tol: f64,
    /// Steps are capped at this multiple of 1/‖ℒ‖∞, inside the stability
    /// region of the method.
    pub stability_factor: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-8,
            first_step: 0.0,
            min_step: 1e-14,
            trace_tol: 1e-8,
            stability_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvolveStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the vectorised state `y` from `t0` to `t1` in place. `step`
/// carries the step size between calls.
pub(crate) fn integrate(
    gen: &Generator,
    y: &mut Vec<Complex64>,
    t0: f64,
    t1: f64,
    step: &mut f64,
    options: &EvolveOptions,
    stats: &mut EvolveStats,
) -> Result<()> {
    let n = y.len();
    let d = gen.space.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut t = t0;
    let norm = gen.norm_estimate().max(1e-300);
    let max_step = options.stability_factor / norm;
    if *step <= 0.0 {
        *step = if options.first_step > 0.0 { options.first_step } else { 0.1 / norm };
    }
    gen.apply(t, y, &mut k[0]);
    while t < t1 {
        let h = step.min(t1 - t);
        if h < options.min_step && t1 - t > options.min_step {
            return Err(Error::StepSizeUnderflow { t });
        }
        for s in 1..7 {
            for j in 0..n {
                let mut acc = zero;
                for (i, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += *a * k[i][j];
                    }
                }
                tmp[j] = y[j] + h * acc;
            }
            gen.apply(t + C[s] * h, &tmp, &mut k[s]);
        }
        // tmp holds the fifth-order solution (FSAL stage); k[6] = ℒ(t+h)·tmp
        let mut err: f64 = 0.0;
        for j in 0..n {
            let e: Complex64 = E.iter().zip(k.iter()).map(|(w, kk)| *w * kk[j]).sum::<Complex64>() * h;
            let scale = options.atol + options.rtol * y[j].norm().max(tmp[j].norm());
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            std::mem::swap(y, &mut tmp);
            k.swap(0, 6);
            stats.accepted += 1;
            let tr: Complex64 = (0..d).map(|i| y[i * d + i]).sum();
            if (tr - 1.0).norm() > options.trace_tol {
                return Err(Error::InvalidState(format!("trace drifted to {tr} at t = {t}")));
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if h == *step || grow < 1.0 {
                *step = (h * grow).min(max_step);
            }
        } else {
            stats.rejected += 1;
            *step = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(())
}
