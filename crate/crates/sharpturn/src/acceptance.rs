//! The acceptance suite: nine end-to-end checks with structured results,
//! shared by the integration test target and the CLI `validate` command.

use std::f64::consts::{E as EULER, PI};
use std::time::Instant;

use serde::Serialize;

use crate::classical::oracle_boundary;
use crate::numerics::geomspace;
use crate::one_turn::{f_at_zero, matching_asymptotics, nu_critical, solve_matching, suppression};
use crate::sphaleron::{build_sphaleron, default_amplitude, instability_check, linear_growth, touch_scaling};
use crate::two_turn_boundary::critical_boundary;
use crate::two_turn_tunneling::{
    default_grid, exact_seed, first_local_index, glue_branches, optimal_energy, refine_exact, solve_all_branches,
    solve_branch, solve_exact, BranchKind,
};
use crate::{ModelParams, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}. {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "one-turn exponent"),
    (2, "thermodynamic identities"),
    (3, "classical oracle vs analytics"),
    (4, "branch topology"),
    (5, "optimal energies"),
    (6, "envelopes"),
    (7, "order of accuracy"),
    (8, "smoothened-turn dynamics"),
    (9, "alpha to zero degeneration"),
];

fn reference_beta() -> f64 {
    PI / 3.0
}

fn reference_two_turn() -> ModelParams {
    ModelParams::two_turn(PI / 30.0, PI / 3.0)
}

type Check = Result<(bool, String)>;

fn one_turn_exponent() -> Check {
    let beta = reference_beta();
    let target = 2.0 * 3f64.ln() - 2.0;
    let closed = f_at_zero(beta);
    let matching = -matching_asymptotics(beta, 0.0)?.big_t();
    let ncr = nu_critical(beta);
    let ok = (closed - target).abs() <= 1e-9 && (matching - closed).abs() <= 1e-9 && (ncr - 0.25).abs() <= 1e-15;
    Ok((
        ok,
        format!("closed {closed:.10} matching {matching:.10} target {target:.10} nu_cr {ncr:.16}"),
    ))
}

fn thermodynamic_identities() -> Check {
    let beta = reference_beta();
    let ncr = nu_critical(beta);
    let (mut worst_t, mut worst_theta): (f64, f64) = (0.0, 0.0);
    for k in 1..=50 {
        let nu = ncr * k as f64 / 51.0;
        let sol = solve_matching(beta, nu)?;
        let (e, n) = (1.0, nu);
        let h = 1e-5;
        let d_e = (suppression(beta, e + h, n)? - suppression(beta, e - h, n)?) / (2.0 * h);
        let d_n = (suppression(beta, e, n + h)? - suppression(beta, e, n - h)?) / (2.0 * h);
        worst_t = worst_t.max((d_e + sol.big_t).abs() / sol.big_t.abs());
        worst_theta = worst_theta.max((d_n + sol.theta).abs() / sol.theta.abs());
    }
    let ok = worst_t <= 1e-6 && worst_theta <= 1e-6;
    Ok((
        ok,
        format!("max rel error dF/dE {worst_t:.2e}, dF/dN {worst_theta:.2e} over 50 points"),
    ))
}

/// Oracle resolution in N, relative to E.
pub const ORACLE_TOLERANCE: f64 = 2.5e-4;
pub const ORACLE_PHASES: usize = 4000;

fn oracle_vs_analytics() -> Check {
    let p = reference_two_turn();
    let (lo_env, hi_env) = ((p.beta + p.alpha).cos().powi(2), (p.beta - p.alpha).cos().powi(2));
    let (mut worst, mut env_ok) = (0.0f64, true);
    for e in geomspace(5e-4, 0.1, 20) {
        let tol = ORACLE_TOLERANCE * e;
        let a = critical_boundary(&p, e).n_cr;
        let o = oracle_boundary(&p, e, ORACLE_PHASES, tol)?.n_cr;
        let allowed = (1e-3 * e).max(2.0 * tol);
        worst = worst.max((a - o).abs() / allowed);
        let r = a / e;
        env_ok &= r >= lo_env - 1e-12 && r <= hi_env + 1e-12;
    }
    Ok((
        worst <= 1.0 && env_ok,
        format!("max |analytic − oracle| / allowed = {worst:.3}, envelope respected: {env_ok}"),
    ))
}

fn branch_topology() -> Check {
    let p = reference_two_turn();
    let n1 = first_local_index(&p);
    let curve = glue_branches(&solve_all_branches(&p, &default_grid())?)?;
    let first = curve
        .points
        .windows(2)
        .rev()
        .find(|w| w[0].kind != w[1].kind)
        .map(|w| (w[1].kind, w[0].kind));
    let ok = n1 == 4 && first == Some((BranchKind::Global, BranchKind::Local(4)));
    let desc = first
        .map(|(a, b)| format!("{a} -> {b}"))
        .unwrap_or_else(|| "none".into());
    Ok((
        ok,
        format!(
            "n1 = {n1}, first switch {desc} at E = {:.5e}",
            curve.switch_energies.first().unwrap_or(&f64::NAN)
        ),
    ))
}

fn optimal_energies() -> Check {
    let p = reference_two_turn();
    let curve = glue_branches(&solve_all_branches(&p, &default_grid())?)?;
    let mut found: Vec<(u32, f64, f64)> = curve
        .local_minima()
        .into_iter()
        .map(|(_, e)| {
            let n = ((1.0 / (8.0 * PI * PI * e)).sqrt() + 0.5).round() as u32;
            (n, e, e / optimal_energy(&p, n) - 1.0)
        })
        .collect();
    found.sort_by_key(|m| m.0);
    let lowest: Vec<_> = found.into_iter().take(3).collect();
    let ok = lowest.len() == 3 && lowest.iter().all(|m| m.2.abs() <= 0.02);
    let desc: Vec<String> = lowest
        .iter()
        .map(|(n, e, r)| format!("n={n} E={e:.5e} rel {r:+.4}"))
        .collect();
    Ok((ok, desc.join(", ")))
}

fn envelopes() -> Check {
    let p = reference_two_turn();
    let curve = glue_branches(&solve_all_branches(&p, &default_grid())?)?;
    let f0 = f_at_zero(p.beta);
    let half = 4.0 / EULER * p.alpha / p.beta.tan();
    let slack = 3.0 * p.alpha * p.alpha;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut positive = true;
    for q in &curve.points {
        let r = q.f0 / q.energy;
        lo = lo.min(r);
        hi = hi.max(r);
        positive &= q.f0 > 0.0;
    }
    let ok = positive && lo >= f0 - half - slack && hi <= f0 + half + slack;
    Ok((
        ok,
        format!(
            "F0/E in [{lo:.6}, {hi:.6}], envelope [{:.6}, {:.6}] ± {slack:.2e}, F0 > 0: {positive}",
            f0 - half,
            f0 + half
        ),
    ))
}

/// RMS of |τ_exact − τ_reduced| along the global branch on a fixed grid.
pub fn tau_discrepancy(alpha: f64, grid: &[f64]) -> Result<f64> {
    let p = ModelParams::two_turn(alpha, PI / 3.0);
    let branch = solve_branch(&p, BranchKind::Global, grid)?;
    let exact = refine_exact(&p, &branch)?;
    let sum: f64 = branch
        .samples
        .iter()
        .zip(&exact)
        .map(|(r, x)| (x.tau - r.tau).powi(2))
        .sum();
    Ok((sum / exact.len() as f64).sqrt())
}

fn order_of_accuracy() -> Check {
    let grid = geomspace(1.3e-3, 0.05, 300);
    let coarse = tau_discrepancy(PI / 30.0, &grid)?;
    let fine = tau_discrepancy(PI / 60.0, &grid)?;
    let ratio = coarse / fine;
    Ok((
        (1.0..=3.0).contains(&ratio),
        format!("rms |dtau| {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3}"),
    ))
}

fn smoothened_dynamics() -> Check {
    let beta = reference_beta();
    let (ode, wkb) = linear_growth(1e3, -0.2, -PI / 2.0 + 0.2)?;
    let growth_err = (ode / wkb - 1.0).abs();
    let exponent = touch_scaling(beta, 1e-3, 4e-3)?;
    let p = ModelParams::one_turn(beta).with_b(1e-3);
    let a = default_amplitude(beta);
    let orbit = build_sphaleron(&p, a, PI / 2.0)?;
    let escapes = instability_check(&p, a)?;
    let ok = growth_err <= 0.02
        && (exponent - 1.0).abs() <= 0.2
        && orbit.residual <= 1e-8
        && escapes[0].escaped_to != escapes[1].escaped_to;
    Ok((
        ok,
        format!(
            "growth ODE/WKB {ode:.3}/{wkb:.3} (err {growth_err:.2e}), scaling exponent {exponent:.3}, orbit residual {:.1e}, escapes {:?}/{:?}",
            orbit.residual, escapes[0].escaped_to, escapes[1].escaped_to
        ),
    ))
}

fn alpha_degeneration() -> Check {
    let p = ModelParams::two_turn(1e-4, PI / 3.0);
    let f0 = f_at_zero(p.beta);
    let mut worst: f64 = 0.0;
    for e in [1e-3f64, 1e-2, 0.1] {
        let seed = exact_seed(&p, 1.0 / (2.0 * e).sqrt(), -1.0);
        let sol = solve_exact(&p, e, 0.0, seed)?;
        worst = worst.max((sol.f / (e * f0) - 1.0).abs());
    }
    Ok((
        worst <= 1e-3,
        format!("max relative deviation from E·f(0): {worst:.2e}"),
    ))
}

/// Runs one criterion by id.
pub fn run(id: u8) -> CriterionResult {
    let start = Instant::now();
    let check = match id {
        1 => one_turn_exponent(),
        2 => thermodynamic_identities(),
        3 => oracle_vs_analytics(),
        4 => branch_topology(),
        5 => optimal_energies(),
        6 => envelopes(),
        7 => order_of_accuracy(),
        8 => smoothened_dynamics(),
        9 => alpha_degeneration(),
        _ => Ok((false, format!("unknown criterion {id}"))),
    };
    let (passed, detail) = check.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run(c.0)).collect()
}
