//! Analytical qubit spectrum across the bifurcation, three-Lorentzian fits
//! and the inferred heating.

use std::f64::consts::TAU;

use squeezon::params::load_scenario;
use squeezon::reduced::{spectrum_scan, ScanOptions};
use squeezon::spectroscopy::{fit_scan, heating_report, InitPolicy};

const CONFIG: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/transmon_kerr_approx.toml"));

pub fn run_example() -> squeezon::Result<()> {
    let scenario = load_scenario(CONFIG)?;
    let ws: Vec<f64> = (0..401).map(|k| TAU * (5500e6 + 0.5e6 * k as f64)).collect();
    let amps: Vec<f64> = [15e6, 20e6, 35e6, 40e6].iter().map(|a| TAU * a).collect();
    let scan = spectrum_scan(
        &scenario.params,
        scenario.pump(),
        scenario.spectroscopy(),
        &ws,
        &amps,
        &ScanOptions::default(),
    );
    let fits = fit_scan(&scan, &InitPolicy::default());
    for (col, fit) in scan.columns.iter().zip(&fits) {
        let summary = col.summary.expect("pump-only point solves");
        print!(
            "eps_p/2pi = {:5.1} MHz  {:?}  r = {:.3}  Delta_r~/2pi = {:7.3} MHz",
            col.pump_amplitude / TAU / 1e6,
            summary.branch,
            summary.r,
            summary.delta_r_tilde / TAU / 1e6
        );
        match &fit.fit {
            Some(t) => println!("  f_c = {:.3} MHz  A_b/A_r = {:.4}", t.f_c / 1e6, t.ratio()),
            None => println!("  fit failed"),
        }
    }
    let report = heating_report(&fits, scenario.pump().frequency)?;
    for row in report.rows.iter().filter(|r| !r.flagged) {
        println!(
            "eps_p/2pi = {:5.1} MHz  inferred r = {:.4}  T_eff = {:.1} mK",
            row.pump_amplitude / TAU / 1e6,
            row.r_inferred,
            row.t_eff * 1e3
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
