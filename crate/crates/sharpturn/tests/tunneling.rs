use std::f64::consts::PI;

use proptest::prelude::*;
use sharpturn::numerics::geomspace;
use sharpturn::one_turn::f_at_zero;
use sharpturn::two_turn_tunneling::{
    band, default_grid, exact_seed, glue_branches, in_band, refine_exact, solve_all_branches, solve_branch,
    solve_exact, BranchKind, TunnelBranch,
};
use sharpturn::{Error, ModelParams};

fn reference() -> ModelParams {
    ModelParams::two_turn(PI / 30.0, PI / 3.0)
}

fn branches() -> Vec<TunnelBranch> {
    solve_all_branches(&reference(), &default_grid()).unwrap()
}

fn sign_changes(v: impl Iterator<Item = f64>) -> usize {
    let v: Vec<f64> = v.collect();
    v.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

#[test]
fn exact_exponent_obeys_energy_derivative() {
    let p = reference();
    let grid = geomspace(2e-3, 0.05, 40);
    let branch = solve_branch(&p, BranchKind::Global, &grid).unwrap();
    for sol in refine_exact(&p, &branch).unwrap().iter().step_by(5) {
        let h = 1e-6 * sol.energy;
        let seed = (sol.t0, sol.t1);
        let up = solve_exact(&p, sol.energy + h, 0.0, seed).unwrap();
        let down = solve_exact(&p, sol.energy - h, 0.0, seed).unwrap();
        let d = (up.f - down.f) / (2.0 * h);
        assert!(
            (d + sol.big_t).abs() <= 1e-6 * sol.big_t.abs(),
            "E = {}: {d} vs {}",
            sol.energy,
            -sol.big_t
        );
    }
}

#[test]
fn reduced_slope_follows_the_delay() {
    // d(F₀/E)/dE = 2(ΔT + 1)/E along a branch
    let bs = branches();
    let global = bs.iter().find(|b| b.kind == BranchKind::Global).unwrap();
    let mut checked = 0;
    for w in global.samples.windows(2) {
        let slope = (w[1].f0 / w[1].energy - w[0].f0 / w[0].energy) / (w[1].energy - w[0].energy);
        let mid = 0.5 * (w[0].delta_t + w[1].delta_t) + 1.0;
        if mid.abs() > 0.05 {
            assert_eq!(slope.signum(), mid.signum(), "E = {}", w[0].energy);
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn local_branches_stay_in_their_band() {
    let p = reference();
    for b in branches().iter().filter(|b| b.kind != BranchKind::Global) {
        let (lo, hi) = band(&p, b.kind);
        for s in &b.samples {
            assert!(in_band(&p, s.tau));
            assert!(
                s.tau > lo - 0.2 && s.tau < hi + 0.2,
                "{}: τ = {} outside ({lo}, {hi})",
                b.kind,
                s.tau
            );
        }
    }
}

#[test]
fn delay_structure_of_branches() {
    let bs = branches();
    let global = bs.iter().find(|b| b.kind == BranchKind::Global).unwrap();
    assert!(sign_changes(global.samples.iter().map(|s| s.delta_t + 1.0)) >= 2);
    let local4 = bs.iter().find(|b| b.kind == BranchKind::Local(4)).unwrap();
    // a single excursion below −1
    assert_eq!(sign_changes(local4.samples.iter().map(|s| s.delta_t + 1.0)), 2);
}

#[test]
fn glued_curve_switches_repeatedly() {
    let curve = glue_branches(&branches()).unwrap();
    let inside = curve
        .switch_energies
        .iter()
        .filter(|&&e| (2e-4..=3e-3).contains(&e))
        .count();
    assert!(inside >= 2, "{:?}", curve.switch_energies);
    assert!(curve.points.windows(2).all(|w| w[0].energy < w[1].energy));
}

#[test]
fn gluing_needs_the_global_branch() {
    let bs: Vec<_> = branches()
        .into_iter()
        .filter(|b| b.kind != BranchKind::Global)
        .collect();
    assert!(matches!(glue_branches(&bs), Err(Error::InvalidInput(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn small_alpha_reduces_to_one_turn(ln_e in (1e-3f64).ln()..(0.2f64).ln()) {
        let e = ln_e.exp();
        let p = ModelParams::two_turn(1e-4, PI / 3.0);
        let sol = solve_exact(&p, e, 0.0, exact_seed(&p, 1.0 / (2.0 * e).sqrt(), -1.0)).unwrap();
        prop_assert!((sol.f / (e * f_at_zero(p.beta)) - 1.0).abs() < 1e-3);
        prop_assert!((sol.big_t - sol.big_t_asymptotic).abs() <= 1e-6 * sol.big_t.abs());
    }
}
