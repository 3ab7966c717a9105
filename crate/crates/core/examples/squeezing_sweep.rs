//! Bogoliubov squeezing of the driven resonator versus pump frequency, and
//! the bound r ≤ ½ asinh(4|Υ|/κ).

use num_complex::Complex64;
use squeezon::squeezing::{r_max, squeeze};

pub fn run_example() -> squeezon::Result<()> {
    let kappa = 1.0;
    let upsilon = Complex64::from_polar(0.12, 0.4);
    println!("r_max = {:.6}", r_max(upsilon, kappa));
    println!("{:>8} {:>9} {:>9} {:>9} {:>10}", "Delta", "r", "theta", "n_th", "Delta_r~");
    let mut best: f64 = 0.0;
    for k in -20..=20 {
        let detuning = 0.1 * k as f64;
        let s = squeeze(upsilon, detuning, kappa)?;
        best = best.max(s.r);
        if k % 4 == 0 {
            println!(
                "{detuning:8.2} {:9.5} {:9.5} {:9.5} {:10.5}",
                s.r, s.theta, s.n_th, s.delta_r_tilde
            );
        }
    }
    println!("largest r on the sweep {best:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> squeezon::Result<()> {
    run_example()
}
