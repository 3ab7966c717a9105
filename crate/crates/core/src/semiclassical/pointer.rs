//! Pointer-state fields α_{i,d}.
//!
//! For qubit state i every drive component obeys
//!
//! ```text
//! 0 = D_d(n) α_{i,d} + ε_d,   D_d(n) = ω_r − ω_d + 𝕊_i^d − iκ/2 + (K + 𝕂_i^d/6) n + K′n²
//! ```
//!
//! with n = |α_i|² = Σ_d |α_{i,d}|². Eliminating α gives the scalar condition
//! g(n) = n − Σ_d |ε_d|²/|D_d(n)|² = 0, whose roots lie in [0, Σ|ε_d|²/(κ/2)²].
//! Clearing denominators turns g into a polynomial, so every root is found by
//! bracketed isolation and then polished by damped Newton on g. A root is
//! stable when g′(n) > 0.

use num_complex::Complex64;
use serde::Serialize;

use super::Branch;
use crate::dispersive::StarkTable;
use crate::error::{Error, Result};
use crate::params::{DriveSpec, SystemParams};
use crate::poly::Poly;

/// Newton damping factor applied on each backtracking step.
const DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchHint {
    L,
    H,
    /// Follow an upward pump ramp: L while it exists, otherwise H.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerOptions {
    /// Residual target relative to max(|ε_d|, κ).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PointerOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointerSolution {
    pub drives: Vec<DriveSpec>,
    /// α_{i,d}, indexed `[state][drive]`.
    pub alpha: Vec<Vec<Complex64>>,
    /// Branch of each qubit state.
    pub branches: Vec<Branch>,
    /// Branch of qubit state 0.
    pub branch: Branch,
    /// Largest |left-hand side| of the field equation over all (i, d).
    pub residual: f64,
    pub converged: bool,
}

impl PointerSolution {
    /// Total photon number |α_i|².
    pub fn photons(&self, state: usize) -> f64 {
        self.alpha[state].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Photon number carried by pump components.
    pub fn pump_photons(&self, state: usize) -> f64 {
        self.alpha[state]
            .iter()
            .zip(&self.drives)
            .filter(|(_, d)| d.is_pump())
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }

    pub fn num_states(&self) -> usize {
        self.alpha.len()
    }

    /// Index of the first drive of the given kind.
    pub fn drive_index(&self, pump: bool) -> Option<usize> {
        self.drives.iter().position(|d| d.is_pump() == pump)
    }
}

/// One root of the scalar field condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub(crate) struct Root {
    pub n: f64,
    pub stable: bool,
    /// Set for stable roots only.
    pub branch: Option<Branch>,
}

/// Scalar field condition for one qubit state, in units of κ/2.
pub(crate) struct FieldEquation {
    half_kappa: f64,
    eps2: Vec<f64>,
    /// Re D_d(n)/(κ/2).
    detuning: Vec<Poly>,
    /// Drive whose bare response defines the L/H labels.
    label_drive: usize,
}

impl FieldEquation {
    pub(crate) fn new(params: &SystemParams, drives: &[DriveSpec], stark_s: &[f64], stark_k: &[f64]) -> Self {
        let h = params.kappa / 2.0;
        let detuning = drives
            .iter()
            .enumerate()
            .map(|(d, drive)| {
                Poly::new(vec![
                    (params.omega_r - drive.frequency + stark_s[d]) / h,
                    (params.kerr + stark_k[d] / 6.0) / h,
                    params.kerr_prime / h,
                ])
            })
            .collect();
        let eps2: Vec<f64> = drives.iter().map(|d| d.amplitude.norm_sqr() / (h * h)).collect();
        let label_drive = (0..drives.len())
            .filter(|&d| drives[d].is_pump())
            .max_by(|&a, &b| eps2[a].total_cmp(&eps2[b]))
            .unwrap_or(0);
        Self {
            half_kappa: h,
            eps2,
            detuning,
            label_drive,
        }
    }

    /// |D_d(n)|²/(κ/2)² as a polynomial in n.
    fn denominator(&self, d: usize) -> Poly {
        let a = &self.detuning[d];
        &(a * a) + &Poly::constant(1.0)
    }

    fn g(&self, n: f64) -> f64 {
        n - self
            .detuning
            .iter()
            .zip(&self.eps2)
            .map(|(a, e)| e / (a.eval(n).powi(2) + 1.0))
            .sum::<f64>()
    }

    fn dg(&self, n: f64) -> f64 {
        1.0 + self
            .detuning
            .iter()
            .zip(&self.eps2)
            .map(|(a, e)| {
                let q = a.eval(n).powi(2) + 1.0;
                e * 2.0 * a.eval(n) * a.derivative().eval(n) / (q * q)
            })
            .sum::<f64>()
    }

    /// n·Π q_d − Σ_d ε_d² Π_{e≠d} q_e, normalised by Π q_d(0).
    fn polynomial(&self) -> Poly {
        let q: Vec<Poly> = (0..self.eps2.len()).map(|d| self.denominator(d)).collect();
        let product = |skip: Option<usize>| {
            q.iter()
                .enumerate()
                .filter(|(e, _)| Some(*e) != skip)
                .fold(Poly::constant(1.0), |acc, (_, p)| &acc * p)
        };
        let mut p = &Poly::new(vec![0.0, 1.0]) * &product(None);
        for (d, e) in self.eps2.iter().enumerate() {
            if *e != 0.0 {
                p = &p - &product(Some(d)).scale(*e);
            }
        }
        let norm: f64 = q.iter().map(|p| p.eval(0.0)).product();
        p.scale(1.0 / norm)
    }

    fn polish(&self, mut n: f64, max_iterations: usize) -> f64 {
        let mut gn = self.g(n);
        for _ in 0..max_iterations {
            let slope = self.dg(n);
            if gn == 0.0 || slope == 0.0 || !slope.is_finite() {
                break;
            }
            let mut step = gn / slope;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = (n - step).max(0.0);
                let gt = self.g(trial);
                if gt.abs() < gn.abs() {
                    n = trial;
                    gn = gt;
                    accepted = true;
                    break;
                }
                step *= DAMPING;
            }
            if !accepted {
                break;
            }
        }
        n
    }

    /// Bare response F(n) = n|D(n)|²/(κ/2)² of the labelling drive.
    fn label_curve(&self) -> Poly {
        &Poly::new(vec![0.0, 1.0]) * &self.denominator(self.label_drive)
    }

    /// Smallest positive inflection point of the labelling drive's response.
    /// Stable roots above it sit on the H branch.
    fn inflection(&self) -> Option<f64> {
        let f2 = self.label_curve().derivative().derivative();
        f2.real_roots(0.0, f2.root_bound()).into_iter().find(|&n| n > 0.0)
    }

    /// Whether the labelling drive's response folds back anywhere.
    pub(crate) fn has_folds(&self) -> bool {
        let f1 = self.label_curve().derivative();
        f1.real_roots(0.0, f1.root_bound()).into_iter().any(|n| n > 0.0)
    }

    /// All roots, ascending, with stability and branch labels.
    pub(crate) fn roots(&self, max_iterations: usize) -> Vec<Root> {
        let hi: f64 = self.eps2.iter().sum();
        let raw = self.polynomial().real_roots(0.0, hi * (1.0 + 1e-9));
        let mut roots: Vec<Root> = raw
            .into_iter()
            .map(|n| {
                let n = self.polish(n, max_iterations);
                Root {
                    n,
                    stable: self.dg(n) > 0.0,
                    branch: None,
                }
            })
            .collect();

        let stable: Vec<usize> = (0..roots.len()).filter(|&k| roots[k].stable).collect();
        match stable.len() {
            0 => {}
            1 => {
                let n = roots[stable[0]].n;
                let high = self.inflection().is_some_and(|n_i| n > n_i);
                roots[stable[0]].branch = Some(if high { Branch::H } else { Branch::L });
            }
            _ => {
                for (rank, &k) in stable.iter().enumerate() {
                    roots[k].branch = Some(if rank == 0 { Branch::L } else { Branch::H });
                }
            }
        }
        roots
    }

    /// α_d = −ε_d / D_d(n).
    pub(crate) fn alpha(&self, amplitudes: &[Complex64], n: f64) -> Vec<Complex64> {
        amplitudes
            .iter()
            .zip(&self.detuning)
            .map(|(eps, a)| -eps / (self.half_kappa * Complex64::new(a.eval(n), -1.0)))
            .collect()
    }
}

/// Left-hand side of the field equation for every drive of one qubit state.
pub fn equation_residuals(
    params: &SystemParams,
    drives: &[DriveSpec],
    stark_s: &[f64],
    stark_k: &[f64],
    alpha: &[Complex64],
) -> Vec<Complex64> {
    let n: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    drives
        .iter()
        .enumerate()
        .map(|(d, drive)| {
            let bracket = Complex64::new(
                params.omega_r - drive.frequency + stark_s[d]
                    + (params.kerr + stark_k[d] / 6.0) * n
                    + params.kerr_prime * n * n,
                -params.kappa / 2.0,
            );
            bracket * alpha[d] + drive.amplitude
        })
        .collect()
}

fn stark_row(stark: &[StarkTable], state: usize) -> (Vec<f64>, Vec<f64>) {
    (
        stark.iter().map(|t| t.s[state]).collect(),
        stark.iter().map(|t| t.k[state]).collect(),
    )
}

pub(crate) fn state_equation(
    params: &SystemParams,
    drives: &[DriveSpec],
    stark: &[StarkTable],
    state: usize,
) -> FieldEquation {
    let (s, k) = stark_row(stark, state);
    FieldEquation::new(params, drives, &s, &k)
}

/// Residual target for a drive set.
pub fn tolerance_scale(params: &SystemParams, drives: &[DriveSpec]) -> f64 {
    drives
        .iter()
        .map(|d| d.amplitude.norm())
        .fold(params.kappa, f64::max)
}

fn assemble(
    params: &SystemParams,
    drives: &[DriveSpec],
    stark: &[StarkTable],
    choices: &[(f64, Branch)],
    options: &PointerOptions,
) -> Result<PointerSolution> {
    let amplitudes: Vec<Complex64> = drives.iter().map(|d| d.amplitude).collect();
    let mut alpha = Vec::with_capacity(choices.len());
    let mut residual: f64 = 0.0;
    for (i, &(n, _)) in choices.iter().enumerate() {
        let a = state_equation(params, drives, stark, i).alpha(&amplitudes, n);
        let (s, k) = stark_row(stark, i);
        for r in equation_residuals(params, drives, &s, &k, &a) {
            residual = residual.max(r.norm());
        }
        alpha.push(a);
    }
    let branches: Vec<Branch> = choices.iter().map(|c| c.1).collect();
    let converged = residual <= options.tolerance * tolerance_scale(params, drives);
    let sol = PointerSolution {
        drives: drives.to_vec(),
        alpha,
        branch: branches[0],
        branches,
        residual,
        converged,
    };
    if converged {
        Ok(sol)
    } else {
        Err(Error::NonConvergence {
            residual,
            best: Some(Box::new(sol)),
        })
    }
}

fn check_inputs(params: &SystemParams, drives: &[DriveSpec], stark: &[StarkTable]) {
    assert_eq!(stark.len(), drives.len(), "one Stark table per drive");
    for t in stark {
        assert_eq!(t.s.len(), params.num_levels(), "Stark table size");
    }
}

/// Solves the pointer-state equations for every qubit state.
///
/// `stark` holds one table per drive, in drive order (see
/// [`crate::dispersive::stark_tables`]).
pub fn solve_pointer_states(
    params: &SystemParams,
    drives: &[DriveSpec],
    stark: &[StarkTable],
    hint: BranchHint,
    options: &PointerOptions,
) -> Result<PointerSolution> {
    check_inputs(params, drives, stark);
    let mut choices = Vec::with_capacity(params.num_levels());
    for i in 0..params.num_levels() {
        let eq = state_equation(params, drives, stark, i);
        let stable: Vec<Root> = eq
            .roots(options.max_iterations)
            .into_iter()
            .filter(|r| r.stable)
            .collect();
        let pick = |b: Branch| stable.iter().find(|r| r.branch == Some(b)).copied();
        let chosen = match hint {
            BranchHint::Auto => pick(Branch::L).or_else(|| pick(Branch::H)),
            BranchHint::L | BranchHint::H => {
                let b = if hint == BranchHint::L { Branch::L } else { Branch::H };
                match pick(b) {
                    Some(r) => Some(r),
                    None if stable.len() == 1 && !eq.has_folds() => Some(stable[0]),
                    None => return Err(Error::BranchUnavailable(b)),
                }
            }
        };
        let Some(root) = chosen else {
            return Err(Error::NonConvergence {
                residual: f64::INFINITY,
                best: None,
            });
        };
        choices.push((root.n, root.branch.expect("stable roots carry a label")));
    }
    assemble(params, drives, stark, &choices, options)
}

/// Result of a pump-amplitude ramp.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ramp {
    pub scales: Vec<f64>,
    pub points: Vec<PointerSolution>,
    /// Per qubit state, the scale values at which the tracked branch vanished
    /// and the solution jumped, located by interval halving.
    pub jumps: Vec<Vec<f64>>,
}

/// Follows each pointer state continuously while the pump amplitudes are
/// multiplied by `scales` (in the given order). The branch is kept until it
/// disappears at a fold, where the solution jumps to the remaining stable root.
/// An ascending ramp starts on the lowest stable root, a descending one on the
/// highest.
pub fn ramp_pointer_states(
    params: &SystemParams,
    drives: &[DriveSpec],
    stark: &[StarkTable],
    scales: &[f64],
    options: &PointerOptions,
) -> Result<Ramp> {
    check_inputs(params, drives, stark);
    let ascending = scales.len() < 2 || scales[scales.len() - 1] >= scales[0];
    let scaled = |s: f64| -> Vec<DriveSpec> {
        drives
            .iter()
            .map(|d| if d.is_pump() { d.with_amplitude(d.amplitude * s) } else { *d })
            .collect()
    };
    let stable_roots = |s: f64, i: usize| -> Vec<Root> {
        state_equation(params, &scaled(s), stark, i)
            .roots(options.max_iterations)
            .into_iter()
            .filter(|r| r.stable)
            .collect()
    };

    let m = params.num_levels();
    let mut current: Vec<Option<Branch>> = vec![None; m];
    let mut jumps = vec![Vec::new(); m];
    let mut points = Vec::with_capacity(scales.len());
    for (step, &s) in scales.iter().enumerate() {
        let mut choices = Vec::with_capacity(m);
        for i in 0..m {
            let stable = stable_roots(s, i);
            let first = if ascending { stable.first() } else { stable.last() };
            let root = match current[i] {
                None => first.copied(),
                Some(b) => match stable.iter().find(|r| r.branch == Some(b)) {
                    Some(r) => Some(*r),
                    None => {
                        let (mut lo, mut hi) = (scales[step - 1], s);
                        for _ in 0..60 {
                            let mid = 0.5 * (lo + hi);
                            if stable_roots(mid, i).iter().any(|r| r.branch == Some(b)) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        jumps[i].push(0.5 * (lo + hi));
                        first.copied()
                    }
                },
            };
            let root = root.ok_or(Error::NonConvergence {
                residual: f64::INFINITY,
                best: None,
            })?;
            let b = root.branch.expect("stable roots carry a label");
            current[i] = Some(b);
            choices.push((root.n, b));
        }
        points.push(assemble(params, &scaled(s), stark, &choices, options)?);
    }
    Ok(Ramp {
        scales: scales.to_vec(),
        points,
        jumps,
    })
}

/// β_i = α_{i+1} − α_i per drive.
pub fn distinguishability(sol: &PointerSolution, state: usize) -> Result<Vec<Complex64>> {
    if state + 1 >= sol.num_states() {
        return Err(Error::InvalidParams(format!(
            "distinguishability needs states {state} and {}",
            state + 1
        )));
    }
    let (lower_branch, upper_branch) = (sol.branches[state], sol.branches[state + 1]);
    if lower_branch != upper_branch {
        return Err(Error::BranchMismatch {
            lower: state,
            upper: state + 1,
            lower_branch,
            upper_branch,
        });
    }
    Ok(sol.alpha[state + 1]
        .iter()
        .zip(&sol.alpha[state])
        .map(|(a1, a0)| a1 - a0)
        .collect())
}

/// Measurement-induced dephasing Γ_φm = κ Σ_d |α_{1,d} − α_{0,d}|² / 2.
pub fn measurement_dephasing(params: &SystemParams, sol: &PointerSolution) -> f64 {
    sol.alpha[1]
        .iter()
        .zip(&sol.alpha[0])
        .map(|(a1, a0)| (a1 - a0).norm_sqr())
        .sum::<f64>()
        * params.kappa
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersive::stark_tables;
    use crate::params::fixtures::*;

    fn zero_stark(params: &SystemParams, drives: &[DriveSpec]) -> Vec<StarkTable> {
        drives
            .iter()
            .map(|d| StarkTable::zero(*d, params.num_levels()))
            .collect()
    }

    #[test]
    fn undriven_fixed_point() {
        let p = three_level();
        let drives = [DriveSpec::pump(0.0, 99.0), DriveSpec::spectroscopy(0.0, 80.0)];
        let stark = stark_tables(&p, &drives, 1.0).unwrap();
        let sol = solve_pointer_states(&p, &drives, &stark, BranchHint::Auto, &Default::default()).unwrap();
        assert!(sol.alpha.iter().flatten().all(|a| *a == Complex64::new(0.0, 0.0)));
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn linear_closed_form() {
        let p = two_level(0.0);
        let drives = [DriveSpec::pump(Complex64::new(0.3, 0.2), 99.2), DriveSpec::spectroscopy(0.1, 80.0)];
        let stark = zero_stark(&p, &drives);
        let sol = solve_pointer_states(&p, &drives, &stark, BranchHint::Auto, &Default::default()).unwrap();
        for d in 0..2 {
            let want = -drives[d].amplitude / Complex64::new(p.omega_r - drives[d].frequency, -0.5);
            for i in 0..2 {
                assert!((sol.alpha[i][d] - want).norm() < 1e-14, "{:?}", sol.alpha[i][d]);
            }
        }
        assert!(distinguishability(&sol, 0).unwrap().iter().all(|b| b.norm() < 1e-15));
        assert_eq!(measurement_dephasing(&p, &sol), 0.0);
    }

    #[test]
    fn resonant_linear_response_is_minus_i() {
        let p = two_level(0.0);
        let drives = [DriveSpec::pump(0.5, p.omega_r), DriveSpec::spectroscopy(0.0, 80.0)];
        let sol = solve_pointer_states(&p, &drives, &zero_stark(&p, &drives), BranchHint::Auto, &Default::default())
            .unwrap();
        assert!((sol.alpha[0][0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn hints_select_branches_in_bistable_region() {
        // Ω = 4: bistable for 7 ≲ |ε| ≲ 11.7
        let p = two_level(-0.01);
        let drives = [DriveSpec::pump(9.0, p.omega_r - 2.0), DriveSpec::spectroscopy(0.0, 80.0)];
        let stark = zero_stark(&p, &drives);
        let opts = PointerOptions::default();
        let low = solve_pointer_states(&p, &drives, &stark, BranchHint::L, &opts).unwrap();
        let high = solve_pointer_states(&p, &drives, &stark, BranchHint::H, &opts).unwrap();
        let auto = solve_pointer_states(&p, &drives, &stark, BranchHint::Auto, &opts).unwrap();
        assert!(high.photons(0) > low.photons(0) * 5.0);
        assert_eq!(auto, low);
        assert_eq!(high.branch, Branch::H);

        let weak = [drives[0].with_amplitude(3.0), drives[1]];
        assert!(matches!(
            solve_pointer_states(&p, &weak, &stark, BranchHint::H, &opts),
            Err(Error::BranchUnavailable(Branch::H))
        ));
    }

    #[test]
    fn monostable_curve_accepts_any_hint() {
        let p = two_level(-0.01);
        let drives = [DriveSpec::pump(2.0, p.omega_r - 0.5), DriveSpec::spectroscopy(0.0, 80.0)];
        let stark = zero_stark(&p, &drives);
        let opts = PointerOptions::default();
        let a = solve_pointer_states(&p, &drives, &stark, BranchHint::L, &opts).unwrap();
        let b = solve_pointer_states(&p, &drives, &stark, BranchHint::H, &opts).unwrap();
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn ramp_shows_hysteresis() {
        let p = two_level(-0.01);
        let drives = [DriveSpec::pump(1.0, p.omega_r - 2.0), DriveSpec::spectroscopy(0.0, 80.0)];
        let stark = zero_stark(&p, &drives);
        let up: Vec<f64> = (0..=60).map(|k| k as f64 * 0.25).collect();
        let down: Vec<f64> = up.iter().rev().copied().collect();
        let opts = PointerOptions::default();
        let r_up = ramp_pointer_states(&p, &drives, &stark, &up, &opts).unwrap();
        let r_down = ramp_pointer_states(&p, &drives, &stark, &down, &opts).unwrap();
        assert_eq!(r_up.jumps[0].len(), 1);
        assert_eq!(r_down.jumps[0].len(), 1);
        assert!(r_up.jumps[0][0] > r_down.jumps[0][0]);
        // L fold from F′(n) = 0, with Δ = 4 and K = −0.02 in units of κ/2
        let (d, k) = (4.0_f64, -0.02_f64);
        let n_fold = (-4.0 * d * k - ((4.0 * d * k).powi(2) - 12.0 * k * k * (d * d + 1.0)).sqrt()) / (6.0 * k * k);
        let eps2 = n_fold * ((d + k * n_fold).powi(2) + 1.0) * 0.25;
        assert!((r_up.jumps[0][0] - eps2.sqrt()).abs() < 1e-9, "{} vs {}", r_up.jumps[0][0], eps2.sqrt());
    }
}
