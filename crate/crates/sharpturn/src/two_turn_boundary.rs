//! Boundary N_cr(E) of the classically allowed region for two turns.
//!
//! Reflected trajectories touch the second turn line ξ = 0 tangentially.
//! They are parametrised by the energy and the inclination γ of the
//! trajectory in the intermediate region; the boundary is the lowest N over
//! all γ.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{bracket_root, golden_max, RootConfig};
use crate::{Error, ModelParams, Result};

/// Which family realises the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    Global,
    Local(u32),
}

impl std::fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryKind::Global => write!(f, "global"),
            BoundaryKind::Local(n) => write!(f, "local{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSolution {
    pub gamma: f64,
    pub t0: f64,
    pub phi_prime: f64,
    pub p0: f64,
    /// N = E − p₀²/2
    pub n: f64,
}

/// One entry of the small-α local-branch formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalBranchPoint {
    pub n: u32,
    pub delta_gamma: f64,
    pub p0: f64,
    pub n_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub energy: f64,
    pub n_cr: f64,
    pub kind: BoundaryKind,
    /// Inclination of the critical trajectory.
    pub gamma: f64,
}

/// N_cr(E) = E − E[sinβ cosα − cosβ sinα cos(cosα/(√(2E) sinβ))]².
/// Exact only above the bifurcation energy.
pub fn ncr_global(params: &ModelParams, energy: f64) -> f64 {
    let (sb, cb) = params.beta.sin_cos();
    let (sa, ca) = params.alpha.sin_cos();
    let k = sb * ca - cb * sa * (ca / ((2.0 * energy).sqrt() * sb)).cos();
    energy - energy * k * k
}

/// E_B = α²cos²β/(2 sin⁴β), below which local maxima in γ appear.
pub fn bifurcation_energy(params: &ModelParams) -> f64 {
    let (sb, cb) = params.beta.sin_cos();
    params.alpha.powi(2) * cb * cb / (2.0 * sb.powi(4))
}

fn gamma_unchecked(params: &ModelParams, energy: f64, gamma: f64) -> GammaSolution {
    let (sa, ca) = params.alpha.sin_cos();
    let s2 = (2.0 * energy).sqrt();
    let tb = params.beta.tan();
    let ratio = (gamma.tan() / tb).min(1.0);
    let r = (1.0 / (ratio * ratio) - 1.0).max(0.0).sqrt();
    let (sg, cg) = gamma.sin_cos();
    let t0 = -1.0 / (s2 * sg) + r / ca;
    let phi_prime = -ca / (s2 * sg) + r - ratio.acos();
    let p0 = s2 * (ca * sg - sa * cg * phi_prime.cos());
    GammaSolution {
        gamma,
        t0,
        phi_prime,
        p0,
        n: energy - 0.5 * p0 * p0,
    }
}

/// The tangent trajectory of inclination γ touching ξ = 0 at t = 0.
pub fn gamma_solution(params: &ModelParams, energy: f64, gamma: f64) -> Result<GammaSolution> {
    if !(gamma >= 1e-6 && gamma <= params.beta) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma,
        });
    }
    if !(energy > 0.0) {
        return Err(Error::OutOfDomain {
            what: "E",
            value: energy,
        });
    }
    Ok(gamma_unchecked(params, energy, gamma))
}

fn require_small_alpha(params: &ModelParams) -> Result<()> {
    if params.alpha >= 0.2 {
        return Err(Error::OutOfDomain {
            what: "alpha",
            value: params.alpha,
        });
    }
    Ok(())
}

/// Small-α positions and heights of the local maxima of p₀(γ):
/// δγ_n = −tanβ + √(2E)(sin²β/cosβ)·[2πn − π − arcsin(√(2E)sin²β/(α cosβ))].
///
/// Only maxima with 0 < δγ_n < β are reported.
pub fn local_branches(params: &ModelParams, energy: f64) -> Result<Vec<LocalBranchPoint>> {
    require_small_alpha(params)?;
    let (sb, cb) = params.beta.sin_cos();
    let a = params.alpha;
    let s2 = (2.0 * energy).sqrt();
    let arg = s2 * sb * sb / (a * cb);
    let mut out = Vec::new();
    if !(arg <= 1.0) {
        return Ok(out);
    }
    let asn = arg.asin();
    for n in 1u32.. {
        let bracket = 2.0 * PI * n as f64 - PI - asn;
        let dg = -params.beta.tan() + s2 * sb * sb / cb * bracket;
        if dg >= params.beta {
            break;
        }
        if dg <= 0.0 {
            continue;
        }
        let p0 = 2.0 * s2 * sb - 2.0 * energy * sb * sb * bracket + a * s2 * cb * (1.0 - arg * arg).sqrt();
        out.push(LocalBranchPoint {
            n,
            delta_gamma: dg,
            p0,
            n_value: energy - 0.5 * p0 * p0,
        });
    }
    Ok(out)
}

/// Label of a tangent trajectory by its φ′: the n-th local maximum sits
/// near φ′ = −(2n − 1)π.
fn label(phi_prime: f64) -> u32 {
    ((-phi_prime / PI + 1.0) / 2.0).round().max(1.0) as u32
}

/// p₀(γ) restricted to physical tangent trajectories: positive momentum and
/// touching after the first turn has been passed (t₀ < 0).
fn admissible_p0(params: &ModelParams, energy: f64, gamma: f64) -> f64 {
    let g = gamma_unchecked(params, energy, gamma);
    if g.t0 < 0.0 && g.p0 > 0.0 {
        g.p0
    } else {
        f64::NEG_INFINITY
    }
}

/// Interior local maxima of the admissible p₀(γ), refined by golden
/// section. Only γ that could beat the γ = β value are scanned.
pub fn exact_local_maxima(params: &ModelParams, energy: f64) -> Vec<GammaSolution> {
    let beta = params.beta;
    let s2 = (2.0 * energy).sqrt();
    let p_end = admissible_p0(params, energy, beta);
    // p₀ ≤ √(2E)·sin(γ + α), so smaller γ cannot win
    let floor = if p_end.is_finite() {
        (p_end / s2).min(1.0).asin() - params.alpha
    } else {
        0.0
    };
    let g_lo = floor.max(1e-6) * 0.999;
    if g_lo >= beta {
        return Vec::new();
    }
    // φ′ is nearly linear in u = 1/sinγ
    let (u_hi, u_lo) = (1.0 / g_lo.sin(), 1.0 / beta.sin());
    let rate = params.alpha.cos() / s2 + beta.tan();
    let m = (2000.0 + 100.0 * rate * (u_hi - u_lo)).min(4e6) as usize;
    let gammas: Vec<f64> = (0..=m)
        .map(|i| {
            let u = u_lo + (u_hi - u_lo) * i as f64 / m as f64;
            (1.0 / u).asin()
        })
        .collect();
    let vals: Vec<f64> = gammas.iter().map(|&g| admissible_p0(params, energy, g)).collect();
    let mut out = Vec::new();
    for i in 1..m {
        if vals[i].is_finite() && vals[i] >= vals[i - 1] && vals[i] > vals[i + 1] {
            let (lo, hi) = (gammas[i + 1], gammas[i - 1]);
            let (g, _) = golden_max(|g| admissible_p0(params, energy, g), lo, hi, 1e-14);
            out.push(gamma_unchecked(params, energy, g));
        }
    }
    out
}

/// The lowest N over all tangent trajectories, with the realising branch.
///
/// Uses the exact γ-family; the endpoint γ = β reproduces [`ncr_global`].
pub fn critical_boundary(params: &ModelParams, energy: f64) -> BoundaryPoint {
    let end = gamma_unchecked(params, energy, params.beta);
    let mut best = BoundaryPoint {
        energy,
        n_cr: ncr_global(params, energy),
        kind: BoundaryKind::Global,
        gamma: params.beta,
    };
    if end.t0 >= 0.0 {
        best.n_cr = f64::INFINITY;
    }
    for g in exact_local_maxima(params, energy) {
        if g.n < best.n_cr {
            best = BoundaryPoint {
                energy,
                n_cr: g.n,
                kind: BoundaryKind::Local(label(g.phi_prime)),
                gamma: g.gamma,
            };
        }
    }
    best
}

/// Boundary computed from the printed small-α branch formulas instead of
/// the exact γ-family: min of [`ncr_global`] and the local N_n.
pub fn critical_boundary_small_alpha(params: &ModelParams, energy: f64) -> Result<(f64, BoundaryKind)> {
    let mut best = (ncr_global(params, energy), BoundaryKind::Global);
    for l in local_branches(params, energy)? {
        if l.n_value < best.0 {
            best = (l.n_value, BoundaryKind::Local(l.n));
        }
    }
    Ok(best)
}

/// Energy at which the small-α local branch n is born (δγ_n(E) = 0).
pub fn branch_birth_energy(params: &ModelParams, n: u32) -> Result<f64> {
    require_small_alpha(params)?;
    let (sb, cb) = params.beta.sin_cos();
    let a = params.alpha;
    let eb = bifurcation_energy(params);
    let dg = |e: f64| {
        let s2 = (2.0 * e).sqrt();
        let arg = (s2 * sb * sb / (a * cb)).min(1.0);
        -params.beta.tan() + s2 * sb * sb / cb * (2.0 * PI * n as f64 - PI - arg.asin())
    };
    bracket_root(dg, 1e-12, eb, &RootConfig::with_tolerance(1e-16))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalOptimum {
    pub n: u32,
    pub e_n: f64,
    pub e_n_cr: f64,
}

/// n₀ = [cotβ/(2πα) + 1/2] + 1.
pub fn n0(params: &ModelParams) -> u32 {
    (1.0 / params.beta.tan() / (2.0 * PI * params.alpha) + 0.5).floor() as u32 + 1
}

/// E_n where N_cr touches its lower envelope, and the minima
/// E_n^cr = E_n{1 − arcsin(cotβ/(2πα(n−½)))/(π(n−½))} for n₀ ≤ n ≤ n_max.
pub fn classical_optima(params: &ModelParams, n_max: u32) -> Result<Vec<ClassicalOptimum>> {
    require_small_alpha(params)?;
    let sb = params.beta.sin();
    let cot = 1.0 / params.beta.tan();
    let out = (n0(params)..=n_max)
        .map(|n| {
            let h = n as f64 - 0.5;
            let e_n = 1.0 / (8.0 * PI * PI * h * h * sb * sb);
            let e_n_cr = e_n * (1.0 - (cot / (2.0 * PI * params.alpha * h)).asin() / (PI * h));
            ClassicalOptimum { n, e_n, e_n_cr }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ModelParams {
        ModelParams::two_turn(PI / 30.0, PI / 3.0)
    }

    #[test]
    fn zero_alpha_is_one_turn_line() {
        let p = ModelParams::two_turn(0.0, PI / 3.0);
        assert!((ncr_global(&p, 0.3) - 0.3 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn lower_envelope_touch() {
        let p = model();
        let (sb, _) = p.beta.sin_cos();
        // cos(cosα/(√(2E) sinβ)) = −1 at cosα/(√(2E) sinβ) = 3π
        let s2 = p.alpha.cos() / (3.0 * PI * sb);
        let e = s2 * s2 / 2.0;
        assert!((ncr_global(&p, e) / e - (p.beta + p.alpha).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn gamma_beta_is_global() {
        let p = model();
        for &e in &[1e-3, 0.01, 0.05, 0.3] {
            let g = gamma_solution(&p, e, p.beta).unwrap();
            assert!((g.n - ncr_global(&p, e)).abs() < 1e-12);
        }
        assert!(gamma_solution(&p, 0.01, 1e-7).is_err());
        assert!(gamma_solution(&p, 0.01, p.beta + 1e-3).is_err());
    }

    #[test]
    fn bifurcation_energy_value() {
        assert!((bifurcation_energy(&model()) - 0.0024369).abs() < 1e-7);
        assert!(local_branches(&model(), 0.003).unwrap().is_empty());
    }

    #[test]
    fn local_branch_dips_below_global() {
        let p = model();
        let five = local_branches(&p, 1e-3)
            .unwrap()
            .into_iter()
            .find(|l| l.n == 5)
            .unwrap();
        let g = gamma_solution(&p, 1e-3, p.beta - five.delta_gamma).unwrap();
        assert!(g.n < ncr_global(&p, 1e-3));
        // at 1.3e-3 the printed formula starts at n = 5, and that branch lies
        // above the global curve
        let at = local_branches(&p, 1.3e-3).unwrap();
        assert_eq!(at[0].n, 5);
        assert!(at.iter().all(|l| l.n_value > ncr_global(&p, 1.3e-3)));
        let four = local_branches(&p, 1.6e-3)
            .unwrap()
            .into_iter()
            .find(|l| l.n == 4)
            .unwrap();
        assert!(four.n_value < ncr_global(&p, 1.6e-3));
    }

    #[test]
    fn optima() {
        let p = model();
        assert_eq!(n0(&p), 2);
        let o = classical_optima(&p, 12).unwrap();
        assert_eq!(o[0].n, 2);
        let four = o.iter().find(|o| o.n == 4).unwrap();
        assert!((four.e_n - 1.37853e-3).abs() < 2e-8);
        assert_eq!(o.len(), 11);
    }

    #[test]
    fn exact_boundary_above_bifurcation_is_global() {
        let p = model();
        for &e in &[0.003, 0.01, 0.05, 0.1] {
            let b = critical_boundary(&p, e);
            assert_eq!(b.kind, BoundaryKind::Global);
            assert!((b.n_cr - ncr_global(&p, e)).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn exact_boundary_in_n4_window() {
        let p = model();
        let b = critical_boundary(&p, 1.6e-3);
        assert_eq!(b.kind, BoundaryKind::Local(4));
        assert!(b.n_cr < ncr_global(&p, 1.6e-3));
        assert_eq!(critical_boundary(&p, 1.3e-3).kind, BoundaryKind::Global);
    }
}
