//! Bare Duffing response of a Kerr resonator and the onset of bistability in
//! the (Ω, ε) plane.

use squeezon::params::{DriveSpec, Level, SystemParams, CRITICAL_DETUNING};
use squeezon::semiclassical::{classical_response, drive_at, stability_diagram, StabilityClass};

fn resonator() -> SystemParams {
    // κ = 1 units; the qubit plays no role in the bare response
    SystemParams {
        omega_r: 100.0,
        kerr: -0.1,
        kerr_prime: 0.0,
        kappa: 1.0,
        levels: vec![
            Level { omega: 0.0, coupling: Some(0.0), epsilon: 0.0 },
            Level { omega: 50.0, coupling: None, epsilon: 1.0 },
        ],
        gamma_down: 0.0,
        gamma_phi: 0.0,
        sideband_correction: 1.0,
    }
    .validated()
    .expect("valid resonator")
}

pub fn run_example() -> squeezon::Result<()> {
    let p = resonator();

    println!("response at Omega = 3 versus |eps|:");
    for amp in [0.5, 1.0, 1.5, 2.0] {
        let roots = classical_response(&p, &drive_at(&p, 3.0, amp));
        let ns: Vec<String> = roots
            .iter()
            .map(|r| format!("{:.3}{}", r.n, if r.stable { "" } else { "(u)" }))
            .collect();
        println!("  |eps| = {amp:.1}: n = {}", ns.join(", "));
    }

    let omegas: Vec<f64> = (0..121).map(|k| 1.0 + k as f64 * 0.01).collect();
    let amps: Vec<f64> = (1..=200).map(|k| k as f64 * 0.02).collect();
    let cells = stability_diagram(&p, &omegas, &amps);
    let onset = cells
        .iter()
        .filter(|c| c.classification == StabilityClass::Bistable)
        .map(|c| c.omega_reduced)
        .fold(f64::INFINITY, f64::min);
    println!("first bistable column at Omega = {onset:.2} (critical {CRITICAL_DETUNING:.4})");

    let resonant = classical_response(&p, &DriveSpec::pump(0.5, p.omega_r));
    println!("resonant drive |eps| = 0.5: n = {:.4}", resonant[0].n);
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
