use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Value};
use sharpturn::acceptance;
use sharpturn::classical::{oracle_boundary_with, PhaseSampling};
use sharpturn::numerics::{geomspace, linspace};
use sharpturn::one_turn::{matching_asymptotics, nu_critical, solve_matching, suppression_closed_form};
use sharpturn::sphaleron::{
    default_amplitude, instability_check, linear_growth, mathieu_q, reflected_orbit, touch_distance, touch_scaling,
};
use sharpturn::two_turn_boundary::{classical_optima, critical_boundary, ncr_global};
use sharpturn::two_turn_tunneling::{glue_branches, refine_exact, solve_all_branches, BranchSample, TunnelBranch};
use sharpturn::{ModelParams, Result};

use crate::config::RunConfig;
use crate::output::{Cell, Table};

fn two_turn(cfg: &RunConfig) -> ModelParams {
    ModelParams::two_turn(cfg.alpha, cfg.beta)
}

fn energies(cfg: &RunConfig) -> Vec<f64> {
    geomspace(cfg.emin, cfg.emax, cfg.grid)
}

pub fn one_turn(cfg: &RunConfig) -> Result<Vec<Table>> {
    let beta = cfg.beta;
    let nus = linspace(0.0, nu_critical(beta), cfg.grid);
    let rows: Vec<Vec<Cell>> = nus
        .par_iter()
        .map(|&nu| {
            let closed = suppression_closed_form(beta, nu)?;
            let sol = solve_matching(beta, nu)?;
            let asym = matching_asymptotics(beta, nu)?;
            let matching = if nu == 0.0 {
                -asym.big_t()
            } else {
                -asym.big_t() - asym.theta() * nu
            };
            Ok(vec![
                nu.into(),
                closed.into(),
                matching.into(),
                sol.big_t.into(),
                sol.theta.into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("one_turn", &["nu", "f_closed", "f_matching", "T", "theta"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(vec![t])
}

pub fn boundary(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = two_turn(cfg);
    let k = cfg.energy_scale();
    let points: Vec<_> = energies(cfg)
        .par_iter()
        .map(|&e| (critical_boundary(&p, e), ncr_global(&p, e)))
        .collect();
    let mut curve = Table::new("boundary", &["E", "N_cr", "branch", "N_global"]);
    for (b, g) in points {
        curve.push(vec![
            (k * b.energy).into(),
            (k * b.n_cr).into(),
            Cell::Text(b.kind.to_string()),
            (k * g).into(),
        ]);
    }
    let h_max = 1.0 / (2.0 * 2f64.sqrt() * PI * cfg.beta.sin() * cfg.emin.sqrt());
    let mut optima = Table::new("boundary_optima", &["n", "E_n", "E_n_cr"]);
    for o in classical_optima(&p, (h_max + 0.5).floor() as u32)? {
        optima.push(vec![Cell::Int(o.n.into()), (k * o.e_n).into(), (k * o.e_n_cr).into()]);
    }
    Ok(vec![curve, optima])
}

pub fn oracle(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = two_turn(cfg);
    let sampling = cfg
        .seed
        .map_or(PhaseSampling::Uniform, |seed| PhaseSampling::Random { seed });
    let mut t = Table::new("oracle", &["E", "N_cr_oracle", "N_cr_analytic", "abs_diff"]);
    for e in energies(cfg) {
        let o = oracle_boundary_with(&p, e, cfg.phases, cfg.tol * e, sampling)?;
        let a = critical_boundary(&p, e).n_cr;
        t.push(vec![e.into(), o.n_cr.into(), a.into(), (o.n_cr - a).abs().into()]);
    }
    Ok(vec![t])
}

fn exact_branch(p: &ModelParams, branch: &TunnelBranch) -> Result<TunnelBranch> {
    let samples = refine_exact(p, branch)?
        .into_iter()
        .map(|s| BranchSample {
            energy: s.energy,
            tau: s.tau,
            delta_t: s.delta_t,
            f0: s.f,
            big_t: s.big_t,
        })
        .collect();
    Ok(TunnelBranch {
        samples,
        ..branch.clone()
    })
}

pub fn tunnel(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = two_turn(cfg);
    let k = cfg.energy_scale();
    let mut branches = solve_all_branches(&p, &energies(cfg))?;
    if cfg.exact {
        branches = branches
            .par_iter()
            .map(|b| exact_branch(&p, b))
            .collect::<Result<_>>()?;
    }
    let curve = glue_branches(&branches)?;
    let mut glued = Table::new("tunnel_glued", &["E", "F0", "branch", "is_switch"]);
    for (i, q) in curve.points.iter().enumerate() {
        glued.push(vec![
            (k * q.energy).into(),
            (k * q.f0).into(),
            Cell::Text(q.kind.to_string()),
            Cell::Bool(curve.is_switch(i)),
        ]);
    }
    let mut per = Table::new("tunnel_branches", &["E", "tau", "delta_T", "F0", "T", "branch"]);
    for b in &branches {
        for s in &b.samples {
            per.push(vec![
                (k * s.energy).into(),
                s.tau.into(),
                s.delta_t.into(),
                (k * s.f0).into(),
                s.big_t.into(),
                Cell::Text(b.kind.to_string()),
            ]);
        }
    }
    Ok(vec![glued, per])
}

pub fn sphaleron(cfg: &RunConfig) -> Result<Value> {
    let p = ModelParams::one_turn(cfg.beta).with_b(cfg.b);
    let a = default_amplitude(cfg.beta);
    let q = mathieu_q(&p, a)?;
    let (s_a, s_b) = (-0.2, -PI / 2.0 + 0.2);
    let (ode, wkb) = linear_growth(q, s_a, s_b)?;
    let xi_min = touch_distance(&p)?;
    let exponent = touch_scaling(cfg.beta, cfg.b, 4.0 * cfg.b)?;
    let reflected = reflected_orbit(&p, cfg.s1, a)?;
    let escapes = instability_check(&p, a)?;
    Ok(json!({
        "config": cfg,
        "amplitude": a,
        "q": q,
        "growth": { "s_a": s_a, "s_b": s_b, "ode": ode, "wkb": wkb, "relative_error": (ode / wkb - 1.0).abs() },
        "minimal_xi": xi_min,
        "scaling_exponent": { "b": [cfg.b, 4.0 * cfg.b], "value": exponent },
        "reflected": {
            "offset": reflected.mode.amplitude,
            "asymptotic": reflected.asymptotic,
            "sharp_touch_gap": reflected.sharp_touch_gap,
            "max_rho": reflected.max_rho,
            "symmetry_error": reflected.symmetry_error,
            "orbit_residual": reflected.orbit.residual,
        },
        "instability": escapes,
    }))
}

pub fn validate(only: &[u8]) -> (bool, Value) {
    let results: Vec<_> = if only.is_empty() {
        acceptance::run_all()
    } else {
        only.iter().map(|&id| acceptance::run(id)).collect()
    };
    let passed = results.iter().all(|r| r.passed);
    (passed, json!({ "passed": passed, "criteria": results }))
}
