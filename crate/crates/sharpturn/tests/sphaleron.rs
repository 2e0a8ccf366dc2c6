use std::f64::consts::PI;

use sharpturn::geometry::smooth_profile;
use sharpturn::sphaleron::{
    build_sphaleron, default_amplitude, instability_check, linear_mode, mathieu_q, perturbed_run, reflected_orbit,
    wkb_exponent, DEFAULT_S1,
};
use sharpturn::ModelParams;

fn smooth(b: f64) -> ModelParams {
    ModelParams::one_turn(PI / 3.0).with_b(b)
}

#[test]
fn orbit_energy_and_frequency() {
    let p = smooth(1e-3);
    let a = default_amplitude(p.beta);
    let orbit = build_sphaleron(&p, a, PI / 2.0).unwrap();
    assert!((orbit.energy() - 1.0).abs() < 1e-12);
    assert!((orbit.period() - 2.0 * PI / p.beta.cos()).abs() < 1e-12);
    assert!((orbit.xi() - 1.2785e-3).abs() < 1e-7);
}

#[test]
fn mathieu_parameter_is_positive_and_large() {
    for b in [1e-2, 1e-3, 1e-4] {
        let q = mathieu_q(&smooth(b), default_amplitude(PI / 3.0)).unwrap();
        assert!(q > 25.0, "b = {b}: q = {q}");
    }
}

#[test]
fn wkb_phase_vanishes_at_the_symmetric_point() {
    let mode = linear_mode(&smooth(1e-3), default_amplitude(PI / 3.0), DEFAULT_S1).unwrap();
    assert!(wkb_exponent(&mode, PI / 4.0).unwrap().abs() < 1e-14);
    let half = wkb_exponent(&mode, PI / 2.0).unwrap() / (2.0 * mode.mathieu_q).sqrt();
    assert!((half - 0.59907).abs() < 1e-5);
}

#[test]
fn escape_conserves_the_effective_energy() {
    for b in [1e-2, 4e-3, 1e-3] {
        let p = smooth(b);
        let a = default_amplitude(p.beta);
        let r = reflected_orbit(&p, DEFAULT_S1, a).unwrap();
        let prof = smooth_profile(&p).unwrap();
        let s1 = r.mode.s1;
        let v_eff = |d: f64| -4.0 / b * a * (2.0 * s1).sin() * prof.v(prof.psi0 + d);
        let h = |d: f64, dp: f64| 0.5 * dp * dp + v_eff(d);
        let window: Vec<_> = r
            .psi_samples
            .iter()
            .filter(|x| (x.0 - s1).abs() <= 0.1 * b.sqrt())
            .collect();
        assert!(window.len() >= 2);
        let h0 = h(window[0].1, window[0].2);
        for x in &window {
            let scale = (0.5 * x.2 * x.2).max(v_eff(x.1).abs());
            assert!((h(x.1, x.2) - h0).abs() <= 0.01 * scale, "b = {b}, s = {}", x.0);
        }
    }
}

#[test]
fn reflected_orbit_is_symmetric_and_stays_near_the_line() {
    for b in [1e-2, 1e-3] {
        let p = smooth(b);
        let r = reflected_orbit(&p, DEFAULT_S1, default_amplitude(p.beta)).unwrap();
        assert!(r.symmetry_error <= 1e-6);
        assert!(r.max_rho <= 10.0 * b.sqrt());
        assert!(r.sharp_touch_gap.abs() <= 5.0 * b, "gap {}", r.sharp_touch_gap);
        assert!((r.asymptotic.energy - 1.0).abs() < 1e-6);
        // traced backwards, so this is the incoming sinusoid
        assert!(r.asymptotic.p > 0.0);
    }
}

#[test]
fn perturbations_escape_on_both_sides() {
    let p = smooth(1e-3);
    let a = default_amplitude(p.beta);
    let [down, up] = instability_check(&p, a).unwrap();
    assert!(down.delta < 0.0 && up.delta > 0.0);
    assert_ne!(down.escaped_to, up.escaped_to);
    let still = perturbed_run(&p, a, 0.0, 20.0).unwrap();
    assert!(still.report.is_none());
    assert!(still.max_deviation < 1e-6);
}
