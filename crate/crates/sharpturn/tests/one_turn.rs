use std::f64::consts::PI;

use proptest::prelude::*;
use sharpturn::one_turn::{f_at_zero, nu_critical, solve_matching, suppression, suppression_closed_form};

proptest! {
    #[test]
    fn closed_form_matches_matching_route(beta in 0.3f64..1.3, frac in 0.01f64..0.99) {
        let nu = frac * nu_critical(beta);
        let closed = suppression_closed_form(beta, nu).unwrap();
        let sol = solve_matching(beta, nu).unwrap();
        prop_assert!((closed - sol.f).abs() < 1e-9, "{} vs {}", closed, sol.f);
    }

    #[test]
    fn exponent_scales_with_energy(beta in 0.3f64..1.3, frac in 0.0f64..0.99, e in 0.01f64..10.0) {
        let nu = frac * nu_critical(beta);
        let f = suppression_closed_form(beta, nu).unwrap();
        let big_f = suppression(beta, e, nu * e).unwrap();
        prop_assert!((big_f - e * f).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn exponent_decreases_with_excitation(beta in 0.3f64..1.3, a in 0.0f64..0.98, gap in 0.005f64..0.5) {
        let ncr = nu_critical(beta);
        let b = (a + gap).min(0.999);
        let fa = suppression_closed_form(beta, a * ncr).unwrap();
        let fb = suppression_closed_form(beta, b * ncr).unwrap();
        prop_assert!(fb < fa);
        prop_assert!(fb > 0.0);
    }
}

#[test]
fn exponent_vanishes_at_the_critical_excitation() {
    let beta = PI / 3.0;
    let f = suppression_closed_form(beta, nu_critical(beta)).unwrap();
    assert!(f.abs() < 1e-12, "{f}");
    assert!((f_at_zero(beta) - (2.0 * 3f64.ln() - 2.0)).abs() < 1e-12);
}
