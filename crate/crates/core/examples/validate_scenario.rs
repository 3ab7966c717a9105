//! Load a scenario file, print its provenance hash and check that the
//! serialized form loads back to the same parameters.

use squeezon::params::{load_scenario, reduced_detuning, serialize_scenario, CRITICAL_DETUNING};

const CONFIG: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/transmon_kerr_approx.toml"));

pub fn run_example() -> squeezon::Result<()> {
    let scenario = load_scenario(CONFIG)?;
    let p = &scenario.params;
    println!("scenario hash {}", scenario.hash());
    println!("levels {}, kappa/2pi = {:.3} MHz", p.num_levels(), p.kappa / std::f64::consts::TAU / 1e6);
    let omega = reduced_detuning(p, scenario.pump());
    println!("pump reduced detuning {omega:.4} = {:.3} x critical", omega / CRITICAL_DETUNING);

    let reloaded = load_scenario(&serialize_scenario(&scenario))?;
    assert_eq!(reloaded, scenario);
    println!("round trip ok");
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
