use std::f64::consts::TAU;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parses `"<number> <unit>"` into rad/s.
///
/// Accepted units: `Hz`, `kHz`, `MHz`, `GHz` (ordinary frequency, scaled by
/// 2π) and `rad/s`. Whitespace between number and unit is optional.
pub fn parse_quantity(text: &str) -> Result<f64> {
    const UNITS: [(&str, f64); 5] = [
        ("rad/s", 1.0),
        ("GHz", TAU * 1e9),
        ("MHz", TAU * 1e6),
        ("kHz", TAU * 1e3),
        ("Hz", TAU),
    ];
    let t = text.trim();
    let (num, scale) = UNITS
        .iter()
        .find_map(|&(unit, scale)| t.strip_suffix(unit).map(|num| (num, scale)))
        .ok_or_else(|| Error::Config(format!("quantity '{t}' has no recognised unit")))?;
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("quantity '{t}' has an invalid number")))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("quantity '{t}' is not finite")));
    }
    Ok(value * scale)
}

/// Formats an angular frequency so that [`parse_quantity`] returns the same bits.
pub fn format_quantity(rad_per_s: f64) -> String {
    format!("{rad_per_s:?} rad/s")
}

/// Inclusive linear range `start:stop:count`, endpoints given as quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl Range {
    /// Parses a range of plain numbers, such as reduced detunings.
    pub fn parse_plain(s: &str) -> Result<Self> {
        parse_range(s, |t| {
            t.trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Config(format!("range endpoint '{t}' is not a finite number")))
        })
    }
}

fn parse_range(s: &str, endpoint: impl Fn(&str) -> Result<f64>) -> Result<Range> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("range '{s}' must be start:stop:count")));
    }
    let count = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("range '{s}' has an invalid count")))?;
    Ok(Range {
        start: endpoint(parts[0])?,
        stop: endpoint(parts[1])?,
        count,
    })
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_range(s, parse_quantity)
    }
}
