//! Semiclassical resonator fields: the bare Duffing response, its stability
//! diagram, and the qubit-state-dependent pointer states.

mod duffing;
mod pointer;

use std::fmt;

use serde::Serialize;

pub use duffing::{
    classical_response, classify, drive_at, stability_diagram, ResponseRoot, StabilityCell, StabilityClass,
};
pub use pointer::{
    distinguishability, equation_residuals, measurement_dephasing, ramp_pointer_states, solve_pointer_states,
    tolerance_scale, BranchHint, PointerOptions, PointerSolution, Ramp,
};

/// Low- or high-amplitude response branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    L,
    H,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L => "L",
            Self::H => "H",
        })
    }
}
