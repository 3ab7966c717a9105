//! Levenberg–Marquardt least squares with Marquardt diagonal scaling.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Col, Mat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative decrease of χ² falls below this.
    pub ftol: f64,
    /// Stop when every step component is below xtol·(|p| + xtol).
    pub xtol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-15,
            xtol: 1e-13,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// s²(JᵀJ)⁻¹ with s² = χ²/(n − p); `None` when JᵀJ is singular.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residuals r = y − model and Jacobian ∂model/∂p, row per data point.
pub trait LeastSquares {
    fn num_params(&self) -> usize;
    fn evaluate(&self, p: &[f64], residuals: &mut [f64], jacobian: &mut [Vec<f64>]);
    fn num_data(&self) -> usize;
}

fn normal_equations(jac: &[Vec<f64>], res: &[f64], np: usize) -> (Mat<f64>, Col<f64>) {
    let mut a = Mat::<f64>::zeros(np, np);
    let mut g = Col::<f64>::zeros(np);
    for (row, r) in jac.iter().zip(res) {
        for i in 0..np {
            g[i] += row[i] * r;
            for j in 0..=i {
                a[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..np {
        for j in 0..i {
            a[(j, i)] = a[(i, j)];
        }
    }
    (a, g)
}

fn chi2(res: &[f64]) -> f64 {
    res.iter().map(|r| r * r).sum()
}

pub fn levenberg_marquardt(problem: &impl LeastSquares, p0: &[f64], options: &LmOptions) -> Result<LmResult> {
    let (n, np) = (problem.num_data(), problem.num_params());
    if n <= np {
        return Err(Error::FitDiverged(format!("{n} data points for {np} parameters")));
    }
    let mut p = p0.to_vec();
    let mut res = vec![0.0; n];
    let mut jac = vec![vec![0.0; np]; n];
    problem.evaluate(&p, &mut res, &mut jac);
    let mut cost = chi2(&res);
    if !cost.is_finite() {
        return Err(Error::FitDiverged("non-finite residuals at the initial point".into()));
    }
    let mut lambda = options.initial_damping;
    let mut trial_res = vec![0.0; n];
    let mut trial_jac = vec![vec![0.0; np]; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations && !converged {
        iterations += 1;
        let (a, g) = normal_equations(&jac, &res, np);
        let diag_max = (0..np).map(|i| a[(i, i)]).fold(0.0, f64::max);
        if diag_max == 0.0 {
            converged = true;
            break;
        }
        loop {
            let mut damped = a.clone();
            for i in 0..np {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-12 * diag_max);
            }
            let step = damped.partial_piv_lu().solve(&g);
            let trial: Vec<f64> = (0..np).map(|i| p[i] + step[i]).collect();
            problem.evaluate(&trial, &mut trial_res, &mut trial_jac);
            let trial_cost = chi2(&trial_res);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small_step = (0..np).all(|i| step[i].abs() <= options.xtol * (p[i].abs() + options.xtol));
                let small_gain = cost - trial_cost <= options.ftol * cost;
                p = trial;
                std::mem::swap(&mut res, &mut trial_res);
                std::mem::swap(&mut jac, &mut trial_jac);
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                converged = small_step || small_gain || cost == 0.0;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // no downhill step left: at a minimum to working precision
                converged = true;
                break;
            }
        }
    }

    let (a, _) = normal_equations(&jac, &res, np);
    let s2 = cost / (n - np) as f64;
    let inv = a.partial_piv_lu().inverse();
    let covariance = (0..np)
        .all(|i| (0..np).all(|j| inv[(i, j)].is_finite()))
        .then(|| (0..np).map(|i| (0..np).map(|j| s2 * inv[(i, j)]).collect()).collect());
    Ok(LmResult {
        params: p,
        covariance,
        chi2: cost,
        iterations,
        converged,
    })
}
