//! Brute-force master-equation steady state of a weakly driven Kerr
//! resonator coupled to a two-level qubit, compared with the pointer state.

use squeezon::dispersive::stark_tables;
use squeezon::oracle::{solve_steady_state, Frame, OracleOptions};
use squeezon::params::{DriveSpec, Level, SystemParams};
use squeezon::semiclassical::{solve_pointer_states, BranchHint, PointerOptions};

pub fn run_example() -> squeezon::Result<()> {
    let p = SystemParams {
        omega_r: 100.0,
        kerr: -0.02,
        kerr_prime: 0.0,
        kappa: 1.0,
        levels: vec![
            Level { omega: 0.0, coupling: Some(1.0), epsilon: 0.0 },
            Level { omega: 80.0, coupling: None, epsilon: 1.0 },
        ],
        gamma_down: 0.2,
        gamma_phi: 0.1,
        sideband_correction: 1.0,
    }
    .validated()?;
    let pump = DriveSpec::pump(0.6, 99.5);
    let options = OracleOptions {
        n_fock: 15,
        ..OracleOptions::default()
    };
    let state = solve_steady_state(&p, &[pump], Frame::Rotating(pump.frequency), &options)?;
    let m = &state.moments;
    println!(
        "oracle: N = {}, <a> = {:.5}, <n> = {:.5}, P1 = {:.2e}, residual {:.1e}",
        state.space.n_fock, m.a, m.photons, m.populations[1], state.residual
    );

    let quiet = DriveSpec::spectroscopy(0.0, 90.0);
    let drives = [pump, quiet];
    let stark = stark_tables(&p, &drives, 1.0)?;
    let sol = solve_pointer_states(&p, &drives, &stark, BranchHint::Auto, &PointerOptions::default())?;
    let alpha = sol.alpha[0][0];
    println!("pointer state alpha_0 = {alpha:.5}");
    println!("relative difference {:.2e}", (m.a - alpha).norm() / alpha.norm());
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
