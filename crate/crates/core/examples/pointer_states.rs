//! Qubit-state-dependent pointer states and the dispersive quantities built
//! on them, for the approximate transmon scenario.

use std::f64::consts::TAU;

use squeezon::dispersive::{field_dispersives, stark_tables, DispersiveOptions};
use squeezon::params::load_scenario;
use squeezon::semiclassical::{measurement_dephasing, solve_pointer_states, BranchHint, PointerOptions};

const CONFIG: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/transmon_kerr_approx.toml"));

fn mhz(w: f64) -> f64 {
    w / TAU / 1e6
}

pub fn run_example() -> squeezon::Result<()> {
    let scenario = load_scenario(CONFIG)?;
    let p = &scenario.params;
    // the spectroscopy tone is switched off to look at the pump alone
    let drives = [*scenario.pump(), scenario.spectroscopy().with_amplitude(0.0)];
    let stark = stark_tables(p, &drives, 1.0)?;
    for hint in [BranchHint::L, BranchHint::H] {
        let sol = match solve_pointer_states(p, &drives, &stark, hint, &PointerOptions::default()) {
            Ok(sol) => sol,
            Err(e) => {
                println!("{hint:?}: {e}");
                continue;
            }
        };
        println!("{hint:?} branch, residual {:.1e}", sol.residual);
        for i in 0..sol.num_states() {
            println!("  state {i}: alpha = {:.4}, n = {:.3}", sol.alpha[i][0], sol.photons(i));
        }
        let disp = field_dispersives(p, &sol, &stark, DispersiveOptions::default())?;
        println!(
            "  omega10''' / 2pi = {:.4} MHz (bare {:.4} MHz)",
            mhz(disp.omega10_ddd()),
            mhz(p.transition(0))
        );
        println!("  lambda(alpha) = {:?}", disp.lambda_alpha);
        println!("  Upsilon_0 / 2pi = {:.4} MHz", disp.upsilon[0] / (TAU * 1e6));
        println!("  measurement dephasing / 2pi = {:.4} MHz", mhz(measurement_dephasing(p, &sol)));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
