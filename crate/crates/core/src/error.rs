use thiserror::Error;

use crate::semiclassical::{Branch, PointerSolution};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("drive at {drive_frequency} rad/s is resonant with transition {level}->{next} (detuning {detuning} rad/s)", next = .level + 1)]
    ResonantDrive {
        level: usize,
        drive_frequency: f64,
        detuning: f64,
    },

    #[error("pointer-state solver did not converge (scaled residual {residual:e})")]
    NonConvergence {
        residual: f64,
        best: Option<Box<PointerSolution>>,
    },

    #[error("branch {0:?} does not exist at these parameters")]
    BranchUnavailable(Branch),

    #[error("pointer states {lower} and {upper} sit on different branches ({lower_branch:?} vs {upper_branch:?})")]
    BranchMismatch {
        lower: usize,
        upper: usize,
        lower_branch: Branch,
        upper_branch: Branch,
    },

    #[error("dispersive approximation breaks down: |lambda_{level}| = {lambda} exceeds {limit}")]
    DispersiveBreakdown { level: usize, lambda: f64, limit: f64 },

    #[error("no squeezing solution: {0}")]
    NoSqueezingSolution(String),

    #[error("Fock cutoff {n_fock} too small (<n> = {mean_photons:.3}, top-level population {top_population:e})")]
    CutoffTooSmall {
        n_fock: usize,
        mean_photons: f64,
        top_population: f64,
    },

    #[error("Hilbert-space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("generator is time dependent; {0}")]
    TimeDependentGenerator(&'static str),

    #[error("steady-state solve failed: {0}")]
    SingularGenerator(String),

    #[error("integrator step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("density matrix invariant violated: {0}")]
    InvalidState(String),

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("peaks at {a_hz} Hz and {b_hz} Hz are closer than half a width")]
    DegeneratePeaks { a_hz: f64, b_hz: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
