use approx::assert_relative_eq;
use proptest::prelude::*;
use sharpturn::numerics::{bracket_root, geomspace, integrate_ode, linspace, OdeConfig, RootConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_finds_cubic_root(r in -5.0f64..5.0, c in 0.1f64..4.0) {
        // (x − r)(x² + c) has exactly one real root
        let f = |x: f64| (x - r) * (x * x + c);
        let x = bracket_root(f, -10.0, 10.0, &RootConfig::with_tolerance(1e-13)).unwrap();
        prop_assert!((x - r).abs() < 1e-10);
    }

    #[test]
    fn geomspace_is_increasing_with_exact_ends(lo in 1e-6f64..1.0, ratio in 1.5f64..1e4, n in 2usize..200) {
        let g = geomspace(lo, lo * ratio, n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], lo * ratio);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn oscillator_keeps_its_energy(x0 in -2.0f64..2.0, v0 in -2.0f64..2.0) {
        prop_assume!(x0.abs() + v0.abs() > 0.1);
        let sol = integrate_ode(
            |_, y: &[f64], d: &mut [f64]| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            &[x0, v0],
            (0.0, 20.0 * std::f64::consts::PI),
            &[],
            &OdeConfig::default(),
        )
        .unwrap();
        let e0 = x0 * x0 + v0 * v0;
        let (_, y) = sol.final_state();
        prop_assert!(((y[0] * y[0] + y[1] * y[1]) / e0 - 1.0).abs() < 1e-9);
        prop_assert!((y[0] - x0).abs() < 1e-8 * e0.sqrt());
    }
}

#[test]
fn linspace_hits_both_ends() {
    let l = linspace(-1.0, 3.0, 5);
    assert_eq!(l, vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
    assert_relative_eq!(geomspace(1e-4, 1e-2, 3)[1], 1e-3, max_relative = 1e-14);
}
