//! Property tests of the stated invariants across random parameters.

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use squeezon::params::{load_scenario, serialize_scenario, DriveSpec, Level, Scenario, SystemParams};
use squeezon::reduced::{sideband_ratio, steady_state_p1, SidebandModel, SpectralFunction};
use squeezon::squeezing::{r_max, squeeze, squeezing_condition};

fn scenario_text(values: &[f64; 8], unit: &str) -> String {
    let [wr, k, kappa, gd, gp, g, w1, wp] = *values;
    format!(
        r#"
[resonator]
omega_r = "{wr} {unit}"
kerr = "{k} {unit}"
kappa = "{kappa} {unit}"

[qubit]
gamma_down = "{gd} {unit}"
gamma_phi = "{gp} {unit}"

[[qubit.levels]]
omega = "0 {unit}"
g = "{g} {unit}"
epsilon = 0.0

[[qubit.levels]]
omega = "{w1} {unit}"
epsilon = 1.0

[[drives]]
kind = "pump"
frequency = "{wp} {unit}"
amplitude = "{g} {unit}"
amplitude_imag = "{gp} {unit}"

[[drives]]
kind = "spectroscopy"
frequency = "{w1} {unit}"
amplitude = "{gd} {unit}"
"#
    )
}

fn frequencies(s: &Scenario) -> Vec<f64> {
    let p = &s.params;
    let mut v = vec![p.omega_r, p.kerr, p.kerr_prime, p.kappa, p.gamma_down, p.gamma_phi];
    for l in &p.levels {
        v.push(l.omega);
        v.extend(l.coupling);
    }
    for d in &s.drives {
        v.extend([d.frequency, d.amplitude.re, d.amplitude.im]);
    }
    v
}

fn values() -> impl Strategy<Value = [f64; 8]> {
    (
        5.0f64..8.0,
        -1.0f64..0.0,
        0.5f64..10.0,
        0.01f64..1.0,
        0.0f64..1.0,
        1.0f64..100.0,
        3.0f64..4.5,
        5.0f64..8.0,
    )
        .prop_map(|(wr, k, kappa, gd, gp, g, w1, wp)| [wr * 1e3, k, kappa, gd, gp, g, w1 * 1e3, wp * 1e3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_round_trip(v in values()) {
        let s = load_scenario(&scenario_text(&v, "MHz")).unwrap();
        let back = load_scenario(&serialize_scenario(&s)).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.hash(), s.hash());
    }

    #[test]
    fn hz_fields_are_two_pi_larger(v in values()) {
        let hz = frequencies(&load_scenario(&scenario_text(&v, "Hz")).unwrap());
        let rad = frequencies(&load_scenario(&scenario_text(&v, "rad/s")).unwrap());
        for (h, r) in hz.iter().zip(&rad) {
            prop_assert_eq!(*h, r * TAU);
        }
    }

    #[test]
    fn squeezing_solution_is_bounded_and_exact(
        y in 0.0f64..2.0,
        phase in -3.0f64..3.0,
        detuning in -20.0f64..20.0,
        kappa in 0.1f64..5.0,
    ) {
        let upsilon = Complex64::from_polar(y, phase);
        let s = squeeze(upsilon, detuning, kappa).unwrap();
        prop_assert!(s.r >= 0.0 && s.r <= r_max(upsilon, kappa) + 1e-12);
        prop_assert!((s.n_th - s.r.sinh().powi(2)).abs() <= 1e-12 * s.n_th.max(1.0));
        let lhs = squeezing_condition(upsilon, detuning, kappa, s.r, s.theta).norm();
        prop_assert!(lhs <= 1e-10 * (y + kappa + detuning.abs()), "residual {lhs}");
        prop_assert!((s.delta_r_tilde - detuning / (2.0 * s.r).cosh()).abs() <= 1e-12 * detuning.abs().max(1.0));
    }

    #[test]
    fn sideband_ratio_bounded_and_increasing(
        r in 0.0f64..1.5,
        dr in 0.001f64..0.5,
        delta in 5.0f64..50.0,
    ) {
        let sf = SpectralFunction { kappa: 1.0, delta_r_tilde: -delta };
        let (full, resolved) = sideband_ratio(r.sinh().powi(2), &sf);
        let (full2, resolved2) = sideband_ratio((r + dr).sinh().powi(2), &sf);
        prop_assert!((0.0..1.0).contains(&full) && (0.0..1.0).contains(&resolved));
        prop_assert!(full2 > full && resolved2 > resolved);
    }

    #[test]
    fn excitation_probability_bounded(
        n_th in 0.0f64..2.0,
        drive in 0.0f64..5.0,
        c in 0.0f64..0.5,
        gamma_down in 0.001f64..1.0,
        gamma_phi in 0.0f64..1.0,
        delta_r in -30.0f64..30.0,
        delta in -60.0f64..60.0,
    ) {
        let model = SidebandModel {
            spectral: SpectralFunction { kappa: 1.0, delta_r_tilde: delta_r },
            n_th,
            drive: drive.into(),
            c: c.into(),
            gamma_down,
            gamma_phi,
        };
        let rates = model.rates(delta);
        prop_assert!(rates.gamma_up_tilde >= 0.0 && rates.gamma_down_tilde > 0.0);
        let p = steady_state_p1(&rates);
        // the thermal weight and the saturated value 1/2 bound P(|1⟩)
        let thermal = rates.gamma_up_tilde / (rates.gamma_up_tilde + rates.gamma_down_tilde);
        prop_assert!(p >= 0.0 && p <= thermal.max(0.5) + 1e-12, "P1 = {p}, thermal {thermal}");
    }
}

#[test]
fn rejected_configs_name_the_problem() {
    let base = scenario_text(&[6000.0, -0.5, 2.0, 0.1, 0.05, 40.0, 4000.0, 6010.0], "MHz");
    let bad_epsilon = base.replace("epsilon = 1.0", "epsilon = 0.9");
    let err = load_scenario(&bad_epsilon).unwrap_err().to_string();
    assert!(err.contains("epsilon_1 must equal 1"), "{err}");
    let zero_kappa = base.replace(r#"kappa = "2 MHz""#, r#"kappa = "0 MHz""#);
    assert!(load_scenario(&zero_kappa).unwrap_err().to_string().contains("kappa"));
    let missing = base.replace("gamma_phi = \"0.05 MHz\"\n", "");
    assert!(load_scenario(&missing).unwrap_err().to_string().contains("gamma_phi"));
}

#[test]
fn decreasing_levels_rejected() {
    let p = SystemParams {
        omega_r: 10.0,
        kerr: 0.0,
        kerr_prime: 0.0,
        kappa: 1.0,
        levels: vec![
            Level { omega: 0.0, coupling: Some(1.0), epsilon: 0.0 },
            Level { omega: -1.0, coupling: None, epsilon: 1.0 },
        ],
        gamma_down: 0.1,
        gamma_phi: 0.0,
        sideband_correction: 1.0,
    };
    assert!(Scenario::new(p, vec![DriveSpec::pump(1.0, 9.0), DriveSpec::spectroscopy(0.1, 1.0)]).is_err());
}
