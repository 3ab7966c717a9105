//! Brute-force Lindblad master equation for the resonator and the
//! multi-level qubit on a truncated Fock space.
//!
//! ```text
//! ρ̇ = −i[H, ρ] + κ D[a]ρ + γ Σ_i (g_i/g_0)² D[|i⟩⟨i+1|]ρ + 2γ_φ D[Π_ε]ρ
//! H = H_r + Σ_i ω_i |i⟩⟨i| + Σ_i g_i (a + a†)(|i⟩⟨i+1| + |i+1⟩⟨i|)
//!       + Σ_d (ε_d e^{−iω_d t} a† + h.c.)
//! ```
//!
//! In the lab frame the coupling keeps its counter-rotating terms. In a frame
//! rotating at ω_f (resonator and qubit ladder both) the coupling is reduced
//! to its rotating-wave form, a drive at ω_f becomes static and every other
//! drive contributes terms oscillating at ±(ω_d − ω_f).

mod evolve;
mod state;
mod superop;

pub use evolve::{EvolveOptions, EvolveStats};
pub use state::{is_bimodal, DensityMatrix, Moments, StateTolerances, TruncatedSpace};
pub use superop::{Csr, SuperBuilder};

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use log::{debug, info};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DriveSpec, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "frequency", rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// Frame rotating at this angular frequency (rad/s).
    Rotating(f64),
}

impl Frame {
    pub fn frequency(&self) -> f64 {
        match self {
            Self::Lab => 0.0,
            Self::Rotating(w) => *w,
        }
    }
}

/// Superoperator multiplied by e^{−iνt}.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTerm {
    pub frequency: f64,
    pub op: Csr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub space: TruncatedSpace,
    pub frame: Frame,
    /// True when the coupling was reduced to its rotating-wave form.
    pub rwa: bool,
    pub static_part: Csr,
    pub periodic: Vec<PeriodicTerm>,
}

impl Generator {
    pub fn is_static(&self) -> bool {
        self.periodic.is_empty()
    }

    /// out = ℒ(t) x
    pub fn apply(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        self.static_part.apply_add(Complex64::new(1.0, 0.0), x, out);
        for term in &self.periodic {
            term.op.apply_add(Complex64::from_polar(1.0, -term.frequency * t), x, out);
        }
    }

    /// Upper bound on the induced ∞-norm of ℒ(t).
    pub fn norm_estimate(&self) -> f64 {
        let row_sum = |m: &Csr| {
            (0..m.dim)
                .map(|r| m.values[m.indptr[r]..m.indptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        row_sum(&self.static_part) + self.periodic.iter().map(|p| row_sum(&p.op)).sum::<f64>()
    }

    /// 2π over the smallest nonzero |ν| of the periodic terms.
    pub fn beat_period(&self) -> Option<f64> {
        self.periodic
            .iter()
            .map(|p| p.frequency.abs())
            .filter(|&w| w > 0.0)
            .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.min(w))))
            .map(|w| std::f64::consts::TAU / w)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Resonator annihilation operator a ⊗ 1.
pub fn annihilation(space: TruncatedSpace) -> Csr {
    let mut t = Vec::new();
    for n in 1..space.n_fock {
        for i in 0..space.m_levels {
            t.push((space.index(n - 1, i), space.index(n, i), c((n as f64).sqrt())));
        }
    }
    Csr::from_triplets(space.dim(), t)
}

/// 1 ⊗ |i⟩⟨j|
pub fn level_operator(space: TruncatedSpace, i: usize, j: usize) -> Csr {
    Csr::from_triplets(
        space.dim(),
        (0..space.n_fock).map(|n| (space.index(n, i), space.index(n, j), c(1.0))).collect(),
    )
}

fn diagonal(space: TruncatedSpace, f: impl Fn(usize, usize) -> f64) -> Csr {
    let mut t = Vec::new();
    for n in 0..space.n_fock {
        for i in 0..space.m_levels {
            t.push((space.index(n, i), space.index(n, i), c(f(n, i))));
        }
    }
    Csr::from_triplets(space.dim(), t)
}

/// Time-independent part of the Hamiltonian in `frame`, drives excluded.
pub fn system_hamiltonian(params: &SystemParams, space: TruncatedSpace, frame: Frame) -> (Csr, bool) {
    let wf = frame.frequency();
    let (k, kp) = (params.kerr, params.kerr_prime);
    let mut h = diagonal(space, |n, i| {
        let nf = n as f64;
        (params.omega_r - wf) * nf
            + 0.5 * k * nf * (nf - 1.0)
            + kp / 3.0 * nf * (nf - 1.0) * (nf - 2.0)
            + params.levels[i].omega
            - i as f64 * wf
    });
    let a = annihilation(space);
    let ad = a.adjoint();
    let rwa = matches!(frame, Frame::Rotating(_));
    for i in 0..space.m_levels.saturating_sub(1) {
        let g = params.coupling(i as isize);
        if g == 0.0 {
            continue;
        }
        let lower = level_operator(space, i, i + 1);
        let raise = lower.adjoint();
        let term = if rwa {
            ad.matmul(&lower).add(&a.matmul(&raise))
        } else {
            a.add(&ad).matmul(&lower.add(&raise))
        };
        h = h.add(&term.scale(c(g)));
    }
    (h, rwa)
}

/// Builds ℒ for `params` and `drives` on `space` in `frame`.
pub fn build_generator(params: &SystemParams, drives: &[DriveSpec], frame: Frame, space: TruncatedSpace) -> Result<Generator> {
    if space.m_levels != params.num_levels() {
        return Err(Error::InvalidParams(format!(
            "space has {} levels but the qubit has {}",
            space.m_levels,
            params.num_levels()
        )));
    }
    if space.n_fock < 2 {
        return Err(Error::InvalidParams("Fock cutoff must be at least 2".into()));
    }
    let d = space.dim();
    let (h, rwa) = system_hamiltonian(params, space, frame);
    let a = annihilation(space);
    let ad = a.adjoint();

    let mut sb = SuperBuilder::new(d);
    sb.hamiltonian(&h);
    let mut periodic = Vec::new();
    let wf = frame.frequency();
    for drive in drives {
        let nu = drive.frequency - wf;
        let v = ad.scale(drive.amplitude);
        if nu.abs() <= 1e-12 * drive.frequency.abs().max(1.0) {
            sb.hamiltonian(&v.add(&v.adjoint()));
        } else {
            for (freq, op) in [(nu, v.clone()), (-nu, v.adjoint())] {
                let mut pb = SuperBuilder::new(d);
                pb.hamiltonian(&op);
                periodic.push(PeriodicTerm { frequency: freq, op: pb.build() });
            }
        }
    }

    sb.dissipator(params.kappa, &a);
    let g0 = params.coupling(0);
    for i in 0..space.m_levels.saturating_sub(1) {
        let weight = if g0 == 0.0 { 1.0 } else { (params.coupling(i as isize) / g0).powi(2) };
        sb.dissipator(params.gamma_down * weight, &level_operator(space, i, i + 1));
    }
    let pi_eps = diagonal(space, |_, i| params.levels[i].epsilon);
    sb.dissipator(2.0 * params.gamma_phi, &pi_eps);

    Ok(Generator {
        space,
        frame,
        rwa,
        static_part: sb.build(),
        periodic,
    })
}

/// Null vector of a time-independent generator, normalised to unit trace.
pub fn steady_state(gen: &Generator, tol: &StateTolerances) -> Result<(DensityMatrix, f64)> {
    if !gen.is_static() {
        return Err(Error::TimeDependentGenerator(
            "steady state needs a generator without oscillating terms",
        ));
    }
    let d = gen.space.dim();
    let n = d * d;
    // the equation for ρ[0,0] is replaced by Tr ρ = 1
    let mut entries: Vec<Triplet<usize, usize, Complex64>> = gen
        .static_part
        .triplets()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, col, v)| Triplet::new(r, col, v))
        .collect();
    entries.extend((0..d).map(|k| Triplet::new(0, k * d + k, c(1.0))));
    let m = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::SingularGenerator(format!("{e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::SingularGenerator(format!("{e:?}")))?;
    let rhs = Col::<Complex64>::from_fn(n, |k| if k == 0 { c(1.0) } else { c(0.0) });
    let x = lu.solve(&rhs);
    let data: Vec<Complex64> = (0..n).map(|k| x[k]).collect();
    if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularGenerator("non-finite solution; steady state is not unique".into()));
    }

    let mut lx = vec![c(0.0); n];
    gen.apply(0.0, &data, &mut lx);
    let residual = lx.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = gen.static_part.max_abs().max(1.0);
    if residual > 1e-9 * scale {
        return Err(Error::SingularGenerator(format!(
            "residual {residual:e} exceeds {:e}; steady state is not unique",
            1e-9 * scale
        )));
    }
    let rho = DensityMatrix::from_vec(gen.space, data);
    rho.validate(tol)?;
    Ok((rho, residual))
}

/// Evolves ρ₀ from `t0` to `t1` under `gen`.
pub fn time_evolve(
    gen: &Generator,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    options: &EvolveOptions,
    tol: &StateTolerances,
) -> Result<(DensityMatrix, EvolveStats)> {
    let mut y = rho0.data.clone();
    let mut step = 0.0;
    let mut stats = EvolveStats::default();
    evolve::integrate(gen, &mut y, t0, t1, &mut step, options, &mut stats)?;
    let rho = DensityMatrix::from_vec(gen.space, y);
    rho.validate(tol)?;
    Ok((rho, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Initial Fock cutoff.
    pub n_fock: usize,
    /// Hard cap on N·M.
    pub max_dim: usize,
    /// ⟨a†a⟩ must stay below this fraction of N.
    pub photon_fraction: f64,
    /// Largest population allowed in the top Fock level.
    pub top_population: f64,
    /// Factor applied to N on escalation.
    pub growth: f64,
    pub tolerances: StateTolerances,
    pub evolve: EvolveOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n_fock: 30,
            max_dim: 200,
            photon_fraction: 0.7,
            top_population: 1e-6,
            growth: 1.5,
            tolerances: StateTolerances::default(),
            evolve: EvolveOptions::default(),
        }
    }
}

impl OracleOptions {
    fn check_cutoff(&self, rho: &DensityMatrix) -> Result<()> {
        let n_fock = rho.space.n_fock;
        let p = rho.fock_distribution();
        let mean: f64 = p.iter().enumerate().map(|(n, pn)| n as f64 * pn).sum();
        let top = *p.last().unwrap();
        if mean >= self.photon_fraction * n_fock as f64 || top > self.top_population {
            return Err(Error::CutoffTooSmall {
                n_fock,
                mean_photons: mean,
                top_population: top,
            });
        }
        Ok(())
    }

    fn space(&self, n_fock: usize, m_levels: usize) -> Result<TruncatedSpace> {
        let space = TruncatedSpace::new(n_fock, m_levels);
        if space.dim() > self.max_dim {
            return Err(Error::DimensionCap {
                dim: space.dim(),
                cap: self.max_dim,
            });
        }
        Ok(space)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSteadyState {
    pub space: TruncatedSpace,
    pub frame: Frame,
    pub rwa: bool,
    #[serde(skip)]
    pub state: DensityMatrix,
    pub moments: Moments,
    pub fock: Vec<f64>,
    /// Fock distribution shows two separated peaks (bistable mixture).
    pub bimodal: bool,
    /// ‖ℒρ‖∞ of the returned state.
    pub residual: f64,
    /// Cutoffs tried before the accepted one.
    pub escalations: Vec<usize>,
}

/// Steady state with automatic Fock-cutoff escalation.
pub fn solve_steady_state(
    params: &SystemParams,
    drives: &[DriveSpec],
    frame: Frame,
    options: &OracleOptions,
) -> Result<OracleSteadyState> {
    let m = params.num_levels();
    let mut n_fock = options.n_fock;
    let mut escalations = Vec::new();
    loop {
        let space = options.space(n_fock, m).map_err(|e| match (e, escalations.is_empty()) {
            (Error::DimensionCap { .. }, false) => Error::CutoffTooSmall {
                n_fock: *escalations.last().unwrap(),
                mean_photons: f64::NAN,
                top_population: f64::NAN,
            },
            (e, _) => e,
        })?;
        let gen = build_generator(params, drives, frame, space)?;
        let (rho, residual) = steady_state(&gen, &options.tolerances)?;
        match options.check_cutoff(&rho) {
            Ok(()) => {
                let fock = rho.fock_distribution();
                return Ok(OracleSteadyState {
                    space,
                    frame,
                    rwa: gen.rwa,
                    moments: rho.moments(),
                    bimodal: is_bimodal(&fock, 1e-4),
                    fock,
                    residual,
                    escalations,
                    state: rho,
                });
            }
            Err(e) => {
                info!("{e}; escalating");
                escalations.push(n_fock);
                let next = ((n_fock as f64 * options.growth).ceil() as usize).max(n_fock + 1);
                if next * m > options.max_dim {
                    if n_fock * m < options.max_dim {
                        n_fock = options.max_dim / m;
                        continue;
                    }
                    return Err(e);
                }
                n_fock = next;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedPopulations {
    /// Level populations averaged over the last beat period.
    pub populations: Vec<f64>,
    /// The same average over the period before.
    pub previous: Vec<f64>,
    /// max |populations − previous|, the averaging-window convergence check.
    pub window_drift: f64,
    pub period: f64,
    pub stats: EvolveStats,
}

/// Evolves ρ₀ for `settle`, then averages the level populations over two
/// consecutive beat periods with `samples` points each.
pub fn averaged_populations(
    gen: &Generator,
    rho0: &DensityMatrix,
    settle: f64,
    samples: usize,
    options: &OracleOptions,
) -> Result<AveragedPopulations> {
    let period = gen.beat_period().unwrap_or(settle.max(1e-300) / 10.0);
    let samples = samples.max(1);
    let m = gen.space.m_levels;
    let mut y = rho0.data.clone();
    let mut step = 0.0;
    let mut stats = EvolveStats::default();
    let t_start = settle - period;
    evolve::integrate(gen, &mut y, 0.0, t_start.max(0.0), &mut step, &options.evolve, &mut stats)?;
    let mut windows = [vec![0.0; m], vec![0.0; m]];
    let dt = period / samples as f64;
    let mut t = t_start.max(0.0);
    for (w, acc) in windows.iter_mut().enumerate() {
        for s in 0..samples {
            let target = t_start.max(0.0) + (w * samples + s + 1) as f64 * dt;
            evolve::integrate(gen, &mut y, t, target, &mut step, &options.evolve, &mut stats)?;
            t = target;
            let rho = DensityMatrix::from_vec(gen.space, y.clone());
            rho.validate(&options.tolerances)?;
            for (a, p) in acc.iter_mut().zip(rho.level_populations()) {
                *a += p / samples as f64;
            }
        }
    }
    let [previous, populations] = windows;
    let window_drift = populations
        .iter()
        .zip(&previous)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    debug!("averaged over period {period}: drift {window_drift:e}, {} steps", stats.accepted);
    Ok(AveragedPopulations {
        populations,
        previous,
        window_drift,
        period,
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectroscopyOptions {
    /// Evolution time before averaging starts; `None` picks 10/min(κ, γ, γ_φ).
    pub settle: Option<f64>,
    pub samples: usize,
    pub oracle: OracleOptions,
}

impl Default for SpectroscopyOptions {
    fn default() -> Self {
        Self {
            settle: None,
            samples: 64,
            oracle: OracleOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleP1Point {
    pub omega_s: f64,
    /// NaN when the evolution failed.
    pub p1: f64,
    pub window_drift: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub space: TruncatedSpace,
    pub rwa: bool,
    /// Pump-only steady state the evolutions start from.
    pub pump_state: OracleSteadyState,
    pub points: Vec<OracleP1Point>,
}

fn default_settle(params: &SystemParams) -> f64 {
    let slowest = [params.kappa, params.gamma_down, params.gamma_phi]
        .into_iter()
        .filter(|&r| r > 0.0)
        .fold(params.kappa, f64::min)
        .max(params.kappa / 50.0);
    10.0 / slowest
}

/// Oracle P(|1⟩) versus spectroscopy frequency in the frame rotating at the
/// pump. Each point starts from the pump-only steady state, evolves with
/// both drives and averages over the pump–probe beat.
pub fn oracle_p1_scan(
    params: &SystemParams,
    pump: &DriveSpec,
    spectroscopy: &DriveSpec,
    omega_s: &[f64],
    options: &SpectroscopyOptions,
) -> Result<OracleSpectrum> {
    let frame = Frame::Rotating(pump.frequency);
    let pump_state = solve_steady_state(params, std::slice::from_ref(pump), frame, &options.oracle)?;
    let space = pump_state.space;
    let settle = options.settle.unwrap_or_else(|| default_settle(params));
    let points = omega_s
        .par_iter()
        .map(|&ws| {
            let drives = [*pump, spectroscopy.with_frequency(ws)];
            let run = build_generator(params, &drives, frame, space)
                .and_then(|gen| averaged_populations(&gen, &pump_state.state, settle, options.samples, &options.oracle));
            match run {
                Ok(avg) => OracleP1Point {
                    omega_s: ws,
                    p1: avg.populations.get(1).copied().unwrap_or(0.0),
                    window_drift: avg.window_drift,
                    error: None,
                },
                Err(e) => OracleP1Point {
                    omega_s: ws,
                    p1: f64::NAN,
                    window_drift: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(OracleSpectrum {
        space,
        rwa: pump_state.rwa,
        pump_state,
        points,
    })
}
