//! Semi-analytical model of a multi-level qubit dispersively coupled to a
//! driven Kerr resonator, with a brute-force Lindblad oracle.
//!
//! All frequencies and rates are angular frequencies in rad/s unless a name
//! says otherwise (`_hz`).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersive;
pub mod error;
pub mod io;
pub mod oracle;
pub mod params;
pub mod poly;
pub mod reduced;
pub mod semiclassical;
pub mod spectroscopy;
pub mod squeezing;

pub use error::{Error, Result};
