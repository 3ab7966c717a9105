//! Per-column fits of a spectrum scan, the heating report and run comparison.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::{fit_lorentzian, fit_three_lorentzians, n_th_from_ratio, InitPolicy, LorentzianTriplet, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::oracle::OracleSpectrum;
use crate::reduced::{SpectrumColumn, SpectrumPoint, SpectrumScan};
use crate::squeezing::effective_temperature;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnFit {
    pub pump_amplitude: f64,
    /// Model-predicted Δ̃_r used to seed the sidebands (rad/s).
    pub delta_r_tilde: Option<f64>,
    pub fit: Option<LorentzianTriplet>,
    pub error: Option<String>,
}

fn column_samples(col: &SpectrumColumn) -> (Vec<f64>, Vec<f64>) {
    col.points
        .iter()
        .filter(|p| p.p1.is_finite())
        .map(|p| (p.omega_s, p.p1))
        .unzip()
}

/// Three-Lorentzian fit of every column, seeded with the column's model Δ̃_r
/// unless `init` fixes the offset.
pub fn fit_scan(scan: &SpectrumScan, init: &InitPolicy) -> Vec<ColumnFit> {
    scan.columns
        .par_iter()
        .map(|col| {
            let delta = col.summary.map(|s| s.delta_r_tilde);
            let policy = InitPolicy {
                delta_r_tilde: init.delta_r_tilde.or(delta),
                width: init.width,
            };
            let (x, y) = column_samples(col);
            match fit_three_lorentzians(&x, &y, &policy) {
                Ok(fit) => ColumnFit {
                    pump_amplitude: col.pump_amplitude,
                    delta_r_tilde: delta,
                    fit: Some(fit),
                    error: None,
                },
                Err(e) => ColumnFit {
                    pump_amplitude: col.pump_amplitude,
                    delta_r_tilde: delta,
                    fit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatingRow {
    pub pump_amplitude: f64,
    /// A_b / A_r
    pub ratio: f64,
    pub ratio_sigma: f64,
    pub r_inferred: f64,
    pub n_th_inferred: f64,
    /// Effective temperature (K) at the pump frequency.
    pub t_eff: f64,
    /// Fit failed, a sideband is missing, or the ratio lies outside [0, 1).
    pub flagged: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatingReport {
    pub pump_frequency: f64,
    pub rows: Vec<HeatingRow>,
}

/// Sideband ratio, inferred sinh²r and effective temperature per pump
/// amplitude. Failed fits become flagged rows with NaN values.
pub fn heating_report(fits: &[ColumnFit], pump_frequency: f64) -> Result<HeatingReport> {
    if !fits.iter().any(|f| f.fit.as_ref().is_some_and(|t| t.fit_ok)) {
        return Err(Error::FitDiverged("no column has a successful triplet fit".into()));
    }
    let rows = fits
        .iter()
        .map(|col| {
            let gap = |note: String| HeatingRow {
                pump_amplitude: col.pump_amplitude,
                ratio: f64::NAN,
                ratio_sigma: f64::NAN,
                r_inferred: f64::NAN,
                n_th_inferred: f64::NAN,
                t_eff: f64::NAN,
                flagged: true,
                note: Some(note),
            };
            let Some(fit) = &col.fit else {
                return gap(col.error.clone().unwrap_or_else(|| "fit failed".into()));
            };
            if fit.a_r <= 0.0 {
                return gap(format!("no red sideband ({:?} model)", fit.model));
            }
            let ratio = fit.ratio();
            if !(0.0..1.0).contains(&ratio) {
                return HeatingRow {
                    ratio,
                    ratio_sigma: fit.ratio_sigma(),
                    note: Some(format!("ratio {ratio:.4} outside [0, 1)")),
                    ..gap(String::new())
                };
            }
            let n_th = n_th_from_ratio(ratio);
            HeatingRow {
                pump_amplitude: col.pump_amplitude,
                ratio,
                ratio_sigma: fit.ratio_sigma(),
                r_inferred: n_th.sqrt().asinh(),
                n_th_inferred: n_th,
                t_eff: effective_temperature(n_th, pump_frequency),
                flagged: !fit.fit_ok,
                note: if fit.a_b <= 0.0 {
                    Some("no blue sideband resolved".into())
                } else {
                    (!fit.flagged.is_empty()).then(|| format!("large relative error: {}", fit.flagged.join(", ")))
                },
            }
        })
        .collect();
    Ok(HeatingReport { pump_frequency, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnComparison {
    pub pump_amplitude: f64,
    /// Center-line positions (Hz) and their difference, oracle − analytic.
    pub center_analytic: f64,
    pub center_oracle: f64,
    pub center_diff: f64,
    pub width_diff: f64,
    pub ratio_diff: f64,
    /// max |ΔP(|1⟩)| over the column.
    pub max_p1_diff: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub columns: Vec<ColumnComparison>,
    pub max_center_diff: f64,
    pub mean_center_diff: f64,
    pub max_p1_diff: f64,
}

/// (center, width, ratio) of a column: a triplet fit when the column is long
/// enough, else a single Lorentzian.
fn column_lines(col: &SpectrumColumn) -> std::result::Result<(f64, f64, f64), String> {
    let (x, y) = column_samples(col);
    if x.len() >= MIN_SAMPLES {
        let init = InitPolicy {
            delta_r_tilde: col.summary.map(|s| s.delta_r_tilde),
            width: None,
        };
        if let Ok(t) = fit_three_lorentzians(&x, &y, &init) {
            return Ok((t.f_c, t.w_c, t.ratio()));
        }
    }
    fit_lorentzian(&x, &y)
        .map(|f| (f.peak.center / TAU, f.peak.width / TAU, f64::NAN))
        .map_err(|e| e.to_string())
}

/// Line-by-line comparison of two scans on identical grids.
pub fn compare_runs(analytic: &SpectrumScan, oracle: &SpectrumScan) -> Result<ComparisonReport> {
    if analytic.omega_s != oracle.omega_s {
        return Err(Error::GridMismatch("spectroscopy frequency grids differ".into()));
    }
    if analytic.pump_amplitudes() != oracle.pump_amplitudes() {
        return Err(Error::GridMismatch("pump amplitude grids differ".into()));
    }
    let columns: Vec<ColumnComparison> = analytic
        .columns
        .iter()
        .zip(&oracle.columns)
        .map(|(a, o)| {
            let max_p1_diff = a
                .points
                .iter()
                .zip(&o.points)
                .map(|(p, q)| (p.p1 - q.p1).abs())
                .filter(|d| d.is_finite())
                .fold(0.0, f64::max);
            let nan = f64::NAN;
            match (column_lines(a), column_lines(o)) {
                (Ok(la), Ok(lo)) => ColumnComparison {
                    pump_amplitude: a.pump_amplitude,
                    center_analytic: la.0,
                    center_oracle: lo.0,
                    center_diff: lo.0 - la.0,
                    width_diff: lo.1 - la.1,
                    ratio_diff: lo.2 - la.2,
                    max_p1_diff,
                    note: None,
                },
                (ra, ro) => ColumnComparison {
                    pump_amplitude: a.pump_amplitude,
                    center_analytic: ra.as_ref().map_or(nan, |l| l.0),
                    center_oracle: ro.as_ref().map_or(nan, |l| l.0),
                    center_diff: nan,
                    width_diff: nan,
                    ratio_diff: nan,
                    max_p1_diff,
                    note: Some(format!(
                        "analytic: {}; oracle: {}",
                        ra.err().unwrap_or_else(|| "ok".into()),
                        ro.err().unwrap_or_else(|| "ok".into())
                    )),
                },
            }
        })
        .collect();
    let diffs: Vec<f64> = columns.iter().map(|c| c.center_diff.abs()).filter(|d| d.is_finite()).collect();
    Ok(ComparisonReport {
        max_center_diff: diffs.iter().copied().fold(0.0, f64::max),
        mean_center_diff: if diffs.is_empty() { f64::NAN } else { diffs.iter().sum::<f64>() / diffs.len() as f64 },
        max_p1_diff: columns.iter().map(|c| c.max_p1_diff).fold(0.0, f64::max),
        columns,
    })
}

/// Wraps oracle P(|1⟩) values as a one-column scan for `compare_runs`.
pub fn scan_from_oracle(pump_amplitude: f64, spectrum: &OracleSpectrum) -> SpectrumScan {
    let points: Vec<SpectrumPoint> = spectrum
        .points
        .iter()
        .map(|p| SpectrumPoint {
            omega_s: p.omega_s,
            p1: p.p1,
            branch: None,
            r: f64::NAN,
            delta_r_tilde: f64::NAN,
            omega10_ddd: f64::NAN,
            error: p.error.clone(),
        })
        .collect();
    let failures = points.iter().filter(|p| p.error.is_some()).count();
    SpectrumScan {
        omega_s: points.iter().map(|p| p.omega_s).collect(),
        columns: vec![SpectrumColumn {
            pump_amplitude,
            points,
            summary: None,
            failures,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{SidebandModel, SpectralFunction};
    use crate::spectroscopy::r_from_ratio;
    use num_complex::Complex64;

    fn synthetic_scan(n_th: f64) -> SpectrumScan {
        let model = SidebandModel {
            spectral: SpectralFunction { kappa: 1.0, delta_r_tilde: -12.0 },
            n_th,
            drive: Complex64::new(0.003, 0.0),
            c: Complex64::new(3.0, 0.0),
            gamma_down: 0.02,
            gamma_phi: 0.01,
        };
        let omega10 = 80.0;
        let omega_s: Vec<f64> = (0..481).map(|k| omega10 - 24.0 + 0.1 * k as f64).collect();
        let points = omega_s
            .iter()
            .map(|&ws| SpectrumPoint {
                omega_s: ws,
                p1: model.p1(omega10 - ws),
                branch: None,
                r: f64::NAN,
                delta_r_tilde: -12.0,
                omega10_ddd: omega10,
                error: None,
            })
            .collect();
        SpectrumScan {
            omega_s: omega_s.clone(),
            columns: vec![SpectrumColumn { pump_amplitude: 1.0, points, summary: None, failures: 0 }],
        }
    }

    #[test]
    fn identical_runs_compare_to_zero() {
        let scan = synthetic_scan(0.2);
        let rep = compare_runs(&scan, &scan).unwrap();
        assert_eq!(rep.max_center_diff, 0.0);
        assert_eq!(rep.max_p1_diff, 0.0);
        assert_eq!(rep.columns[0].width_diff, 0.0);
    }

    #[test]
    fn grid_mismatch() {
        let a = synthetic_scan(0.2);
        let mut b = a.clone();
        b.omega_s[3] += 1e-3;
        assert!(matches!(compare_runs(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn heating_report_recovers_r() {
        let n_th = 0.3;
        let scan = synthetic_scan(n_th);
        let fits = fit_scan(&scan, &InitPolicy { delta_r_tilde: Some(-12.0), width: None });
        let rep = heating_report(&fits, 2.0 * std::f64::consts::PI * 6.4e9).unwrap();
        let row = &rep.rows[0];
        assert!(!row.flagged, "{row:?}");
        let want = n_th.sqrt().asinh();
        assert!((row.r_inferred - want).abs() / want < 0.05, "{} vs {want}", row.r_inferred);
        assert!(row.t_eff > 0.0);
        assert!((r_from_ratio(row.ratio) - row.r_inferred).abs() < 1e-15);
    }

    #[test]
    fn failed_fit_is_a_gap() {
        let fits = vec![
            ColumnFit { pump_amplitude: 1.0, delta_r_tilde: None, fit: None, error: Some("boom".into()) },
        ];
        assert!(heating_report(&fits, 1.0).is_err());
    }
}
