//! CSV outputs and their JSON metadata sidecars.
//!
//! Every table is written as `<name>.csv` next to `<name>.csv.json`, which
//! records the scenario hash, the tolerances in force and the crate version.
//! Frequencies in CSV columns are rad/s unless the column name ends in `_hz`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{OracleSpectrum, OracleSteadyState};
use crate::params::Scenario;
use crate::reduced::{ColumnSummary, ModelPoint, SpectrumColumn, SpectrumPoint, SpectrumScan};
use crate::semiclassical::{classify, Branch, ResponseRoot};
use crate::spectroscopy::{ColumnFit, HeatingReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub crate_version: String,
    pub format_version: u32,
    /// Hash of the resolved scenario (parameters and drives).
    pub scenario_hash: Option<String>,
    /// Hash of the system parameters alone.
    pub params_hash: Option<String>,
    pub scenario: Option<Scenario>,
    pub tolerances: serde_json::Value,
    /// Free-form settings of the run: grids, frames, approximations in use.
    pub settings: BTreeMap<String, serde_json::Value>,
}

impl Metadata {
    pub fn new(command: &str, scenario: Option<&Scenario>) -> Self {
        Self {
            command: command.to_owned(),
            crate_version: env!("CARGO_PKG_VERSION").to_owned(),
            format_version: FORMAT_VERSION,
            scenario_hash: scenario.map(Scenario::hash),
            params_hash: scenario.map(|s| s.params.hash()),
            scenario: scenario.cloned(),
            tolerances: serde_json::Value::Null,
            settings: BTreeMap::new(),
        }
    }

    pub fn with_tolerances(mut self, tolerances: impl Serialize) -> Self {
        self.tolerances = serde_json::to_value(tolerances).expect("tolerances serialize");
        self
    }

    pub fn with_setting(mut self, key: &str, value: impl Serialize) -> Self {
        self.settings
            .insert(key.to_owned(), serde_json::to_value(value).expect("setting serializes"));
        self
    }
}

/// `spectrum.csv` → `spectrum.csv.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes the table and its sidecar.
pub fn write_table<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, meta: &Metadata) -> Result<()> {
    write_csv(path, rows)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_metadata(csv_path: &Path) -> Result<Metadata> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?)
}

/// One root of the bare Duffing response. Unstable roots carry branch `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub omega: f64,
    pub epsilon_d: f64,
    pub n: f64,
    pub branch: String,
    pub class: String,
}

pub fn response_rows(omega_reduced: f64, amplitude: f64, roots: &[ResponseRoot], stable_only: bool) -> Vec<ResponseRow> {
    let class = classify(roots).as_str();
    roots
        .iter()
        .filter(|r| r.stable || !stable_only)
        .map(|r| ResponseRow {
            omega: omega_reduced,
            epsilon_d: amplitude,
            n: r.n,
            branch: r.branch.map_or_else(|| "U".to_owned(), |b| b.to_string()),
            class: class.to_owned(),
        })
        .collect()
}

/// Long-format coefficient table: one value per (quantity, drive, level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveRow {
    pub quantity: String,
    /// Drive index for per-drive tables, empty otherwise.
    pub drive: Option<usize>,
    pub level: usize,
    pub value: f64,
}

pub fn dispersive_rows(point: &ModelPoint) -> Vec<DispersiveRow> {
    let mut rows = Vec::new();
    let mut push = |quantity: &str, drive: Option<usize>, values: &[f64]| {
        rows.extend(values.iter().enumerate().map(|(level, &value)| DispersiveRow {
            quantity: quantity.to_owned(),
            drive,
            level,
            value,
        }));
    };
    let disp = &point.dispersive;
    for (d, table) in disp.stark.iter().enumerate() {
        push("stark_lambda", Some(d), &table.lambda);
        push("stark_x", Some(d), &table.x);
        push("stark_s", Some(d), &table.s);
        push("stark_k", Some(d), &table.k);
    }
    for (d, _) in point.pointer.drives.iter().enumerate() {
        let re: Vec<f64> = point.pointer.alpha.iter().map(|a| a[d].re).collect();
        let im: Vec<f64> = point.pointer.alpha.iter().map(|a| a[d].im).collect();
        push("alpha_re", Some(d), &re);
        push("alpha_im", Some(d), &im);
    }
    push("lambda_alpha", None, &disp.lambda_alpha);
    push("chi_alpha", None, &disp.chi_alpha);
    push("lamb_shift", None, &disp.lamb);
    push("cavity_pull", None, &disp.pull);
    push("omega_dd", None, &disp.omega_dd);
    push("omega_ddd", None, &disp.omega_ddd);
    push("pump_photons", None, &disp.pump_photons);
    let re: Vec<f64> = disp.upsilon.iter().map(|u| u.re).collect();
    let im: Vec<f64> = disp.upsilon.iter().map(|u| u.im).collect();
    push("upsilon_re", None, &re);
    push("upsilon_im", None, &im);
    push("omega_r_shifted", None, &[disp.omega_r_shifted]);
    push("omega10_ddd", None, &[disp.omega10_ddd()]);
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRow {
    pub omega_p: f64,
    pub r: f64,
    pub theta: f64,
    pub n_th: f64,
    pub delta_r_tilde: f64,
    pub branch: Option<String>,
    pub error: Option<String>,
}

impl SqueezingRow {
    pub fn from_point(omega_p: f64, point: &Result<ModelPoint>) -> Self {
        match point {
            Ok(pt) => Self {
                omega_p,
                r: pt.squeezing.r,
                theta: pt.squeezing.theta,
                n_th: pt.squeezing.n_th,
                delta_r_tilde: pt.squeezing.delta_r_tilde,
                branch: Some(pt.pointer.branch.to_string()),
                error: None,
            },
            Err(e) => Self {
                omega_p,
                r: f64::NAN,
                theta: f64::NAN,
                n_th: f64::NAN,
                delta_r_tilde: f64::NAN,
                branch: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub pump_amp: f64,
    pub omega_s: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    pub branch: Option<String>,
    pub r: f64,
    pub delta_r_tilde: f64,
    pub omega10_stark: f64,
    pub error: Option<String>,
}

pub fn spectrum_rows(scan: &SpectrumScan) -> Vec<SpectrumRow> {
    scan.columns
        .iter()
        .flat_map(|col| {
            col.points.iter().map(|p| SpectrumRow {
                pump_amp: col.pump_amplitude,
                omega_s: p.omega_s,
                p1: p.p1,
                branch: p.branch.map(|b| b.to_string()),
                r: p.r,
                delta_r_tilde: p.delta_r_tilde,
                omega10_stark: p.omega10_ddd,
                error: p.error.clone(),
            })
        })
        .collect()
}

fn parse_branch(text: &str) -> Option<Branch> {
    match text {
        "L" => Some(Branch::L),
        "H" => Some(Branch::H),
        _ => None,
    }
}

/// Rebuilds a scan from spectrum rows. Columns keep their first-seen order
/// and must share one ω_s grid. The column summary is approximated by the
/// row nearest the middle of the grid.
pub fn scan_from_rows(rows: &[SpectrumRow]) -> Result<SpectrumScan> {
    let mut columns: Vec<SpectrumColumn> = Vec::new();
    for row in rows {
        let point = SpectrumPoint {
            omega_s: row.omega_s,
            p1: row.p1,
            branch: row.branch.as_deref().and_then(parse_branch),
            r: row.r,
            delta_r_tilde: row.delta_r_tilde,
            omega10_ddd: row.omega10_stark,
            error: row.error.clone(),
        };
        match columns.iter_mut().find(|c| c.pump_amplitude == row.pump_amp) {
            Some(col) => col.points.push(point),
            None => columns.push(SpectrumColumn {
                pump_amplitude: row.pump_amp,
                points: vec![point],
                summary: None,
                failures: 0,
            }),
        }
    }
    let omega_s: Vec<f64> = columns
        .first()
        .map(|c| c.points.iter().map(|p| p.omega_s).collect())
        .unwrap_or_default();
    for col in &mut columns {
        if col.points.len() != omega_s.len() || col.points.iter().zip(&omega_s).any(|(p, w)| p.omega_s != *w) {
            return Err(Error::GridMismatch(format!(
                "column at pump amplitude {} has a different omega_s grid",
                col.pump_amplitude
            )));
        }
        col.failures = col.points.iter().filter(|p| p.error.is_some()).count();
        col.summary = col.points.get(omega_s.len() / 2).and_then(|p| {
            p.branch.map(|branch| ColumnSummary {
                branch,
                photons: f64::NAN,
                r: p.r,
                theta: f64::NAN,
                n_th: p.r.sinh().powi(2),
                delta_r_tilde: p.delta_r_tilde,
                omega10_ddd: p.omega10_ddd,
                upsilon: f64::NAN.into(),
            })
        });
    }
    Ok(SpectrumScan { omega_s, columns })
}

/// Oracle P(|1⟩) at one spectroscopy frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleP1Row {
    pub pump_amp: f64,
    pub omega_s: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    pub window_drift: f64,
    pub n_fock: usize,
    pub error: Option<String>,
}

pub fn oracle_p1_rows(pump_amplitude: f64, spectrum: &OracleSpectrum) -> Vec<OracleP1Row> {
    spectrum
        .points
        .iter()
        .map(|p| OracleP1Row {
            pump_amp: pump_amplitude,
            omega_s: p.omega_s,
            p1: p.p1,
            window_drift: p.window_drift,
            n_fock: spectrum.space.n_fock,
            error: p.error.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub quantity: String,
    pub value: f64,
}

pub fn moment_rows(state: &OracleSteadyState) -> Vec<MomentRow> {
    let m = &state.moments;
    let mut rows: Vec<(String, f64)> = vec![
        ("a_re".into(), m.a.re),
        ("a_im".into(), m.a.im),
        ("photons".into(), m.photons),
        ("a2_re".into(), m.a2.re),
        ("a2_im".into(), m.a2.im),
        ("min_quadrature_variance".into(), m.min_quadrature_variance()),
        ("r_inferred".into(), m.inferred_squeezing()),
    ];
    rows.extend(m.populations.iter().enumerate().map(|(i, p)| (format!("population_{i}"), *p)));
    rows.extend([
        ("n_fock".into(), state.space.n_fock as f64),
        ("bimodal".into(), f64::from(u8::from(state.bimodal))),
        ("residual".into(), state.residual),
    ]);
    rows.into_iter().map(|(quantity, value)| MomentRow { quantity, value }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockRow {
    pub n: usize,
    pub probability: f64,
}

pub fn fock_rows(distribution: &[f64]) -> Vec<FockRow> {
    distribution
        .iter()
        .enumerate()
        .map(|(n, &probability)| FockRow { n, probability })
        .collect()
}

/// One column's three-Lorentzian fit. Frequencies and widths in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub pump_amp: f64,
    pub model: Option<String>,
    pub baseline: f64,
    pub a_c: f64,
    pub f_c_hz: f64,
    pub w_c_hz: f64,
    pub a_r: f64,
    pub f_r_hz: f64,
    pub w_r_hz: f64,
    pub a_b: f64,
    pub f_b_hz: f64,
    pub w_b_hz: f64,
    pub sigma_baseline: f64,
    pub sigma_a_c: f64,
    pub sigma_f_c_hz: f64,
    pub sigma_w_c_hz: f64,
    pub sigma_a_r: f64,
    pub sigma_f_r_hz: f64,
    pub sigma_w_r_hz: f64,
    pub sigma_a_b: f64,
    pub sigma_f_b_hz: f64,
    pub sigma_w_b_hz: f64,
    pub ratio: f64,
    pub ratio_sigma: f64,
    pub chi2: f64,
    /// Space-separated names of parameters with large relative error.
    pub flagged: String,
    pub error: Option<String>,
}

pub fn fit_rows(fits: &[ColumnFit]) -> Vec<FitRow> {
    fits.iter()
        .map(|col| {
            let nan = f64::NAN;
            let (values, sigma, model, ratio, ratio_sigma, chi2, flagged) = match &col.fit {
                Some(t) => (
                    [t.baseline, t.a_c, t.f_c, t.w_c, t.a_r, t.f_r, t.w_r, t.a_b, t.f_b, t.w_b],
                    t.sigma,
                    serde_json::to_value(t.model).ok().and_then(|v| v.as_str().map(str::to_owned)),
                    t.ratio(),
                    t.ratio_sigma(),
                    t.chi2,
                    t.flagged.join(" "),
                ),
                None => ([nan; 10], [nan; 10], None, nan, nan, nan, String::new()),
            };
            FitRow {
                pump_amp: col.pump_amplitude,
                model,
                baseline: values[0],
                a_c: values[1],
                f_c_hz: values[2],
                w_c_hz: values[3],
                a_r: values[4],
                f_r_hz: values[5],
                w_r_hz: values[6],
                a_b: values[7],
                f_b_hz: values[8],
                w_b_hz: values[9],
                sigma_baseline: sigma[0],
                sigma_a_c: sigma[1],
                sigma_f_c_hz: sigma[2],
                sigma_w_c_hz: sigma[3],
                sigma_a_r: sigma[4],
                sigma_f_r_hz: sigma[5],
                sigma_w_r_hz: sigma[6],
                sigma_a_b: sigma[7],
                sigma_f_b_hz: sigma[8],
                sigma_w_b_hz: sigma[9],
                ratio,
                ratio_sigma,
                chi2,
                flagged,
                error: col.error.clone(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingCsvRow {
    pub pump_amp: f64,
    pub ratio: f64,
    pub ratio_sigma: f64,
    pub r_inferred: f64,
    pub n_th_inferred: f64,
    pub t_eff_k: f64,
    pub flagged: bool,
    pub note: Option<String>,
}

pub fn heating_rows(report: &HeatingReport) -> Vec<HeatingCsvRow> {
    report
        .rows
        .iter()
        .map(|r| HeatingCsvRow {
            pump_amp: r.pump_amplitude,
            ratio: r.ratio,
            ratio_sigma: r.ratio_sigma,
            r_inferred: r.r_inferred,
            n_th_inferred: r.n_th_inferred,
            t_eff_k: r.t_eff,
            flagged: r.flagged,
            note: r.note.clone(),
        })
        .collect()
}
