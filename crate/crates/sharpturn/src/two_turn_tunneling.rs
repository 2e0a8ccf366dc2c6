//! Classically forbidden reflection in the two-turn model.
//!
//! The complex trajectory is matched across both turns. For small α the
//! matching reduces to two real equations in τ and ΔT,
//!
//!   1 − τ√(2E) = α·cotβ·cosτ·e^{ΔT},
//!   (1 + ΔT)·e^{−ΔT} = α·cotβ·τ·sinτ,
//!
//! whose solutions form one global and several local branches.

use std::collections::HashMap;
use std::f64::consts::{E as EULER, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::numerics::{complex_newton, continuation_scan, real_newton, RootConfig};
use crate::one_turn::f_at_zero;
use crate::{Error, ModelParams, Result};

const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Largest ΔT kept on the global branch.
pub const GLOBAL_DELTA_T_CUTOFF: f64 = 1.5;
/// Largest change of τ or ΔT accepted between neighbouring grid points.
const CONTINUATION_JUMP: f64 = 0.5;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BranchKind {
    Global,
    Local(u32),
}

impl std::fmt::Display for BranchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BranchKind::Global => write!(f, "global"),
            BranchKind::Local(n) => write!(f, "local{n}"),
        }
    }
}

/// Solution of the exact matching system and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingSolution {
    pub energy: f64,
    pub nu: f64,
    #[serde(skip)]
    pub t0: Complex64,
    #[serde(skip)]
    pub t1: Complex64,
    /// t₁·cosα·cosβ
    #[serde(skip)]
    pub phi1: Complex64,
    pub tau: f64,
    pub delta_t: f64,
    pub tau1: f64,
    pub big_t1: f64,
    #[serde(skip)]
    pub p0_prime: Complex64,
    #[serde(skip)]
    pub x0_prime: Complex64,
    #[serde(skip)]
    pub a_prime: Complex64,
    #[serde(skip)]
    pub abar_prime: Complex64,
    /// T = 2(T₁ − ΔT) + √(2/E)·sinα·Im y′(t₀)
    pub big_t: f64,
    /// T from the asymptotic longitudinal motion, −2·Im x₀/p₀.
    pub big_t_asymptotic: f64,
    /// +∞ at ν = 0.
    pub theta: f64,
    /// F = Im p₀′ − E·T − N·θ
    pub f: f64,
}

/// Residuals of the exact matching system in the unknowns t₀, t₁.
pub fn exact_residual(params: &ModelParams, energy: f64, nu: f64, t0: Complex64, t1: Complex64) -> [Complex64; 2] {
    let (sa, ca) = params.alpha.sin_cos();
    let (sb, cb) = params.beta.sin_cos();
    let phi1 = t1 * ca * cb;
    let dphi = (t1 - t0) * ca;
    let r1 = ca / ((2.0 * energy).sqrt() * sb) + phi1.sin() / cb - phi1.cos() * dphi;
    let r2 = (1.0 - nu).sqrt() - ca * sb * phi1.cos() + sa * (phi1.sin() * dphi.sin() + cb * phi1.cos() * dphi.cos());
    [r1, r2]
}

fn derive(params: &ModelParams, energy: f64, nu: f64, t0: Complex64, t1: Complex64) -> MatchingSolution {
    let (sa, ca) = params.alpha.sin_cos();
    let (sb, cb) = params.beta.sin_cos();
    let s2 = (2.0 * energy).sqrt();
    let phi1 = t1 * ca * cb;
    let p0p = s2 * sb * phi1.cos();
    let x0p = 1.0 + s2 * params.beta.tan() / ca * (phi1.sin() - phi1 * phi1.cos());
    let amp = (energy / 2.0).sqrt() / ca;
    let ap = amp * (c(0.0, 1.0) * phi1 / cb).exp() * (phi1.sin() + c(0.0, cb) * phi1.cos());
    let abp = amp * (c(0.0, -1.0) * phi1 / cb).exp() * (phi1.sin() - c(0.0, cb) * phi1.cos());
    let (em, ep) = ((c(0.0, -1.0) * t0 * ca).exp(), (c(0.0, 1.0) * t0 * ca).exp());
    let yp = ap * em + abp * ep;
    let ypd = c(0.0, -ca) * ap * em + c(0.0, ca) * abp * ep;
    let xp = p0p * t0 + x0p;
    let x = xp * ca - yp * sa;
    let y = xp * sa + yp * ca;
    let yd = p0p * sa + ypd * ca;
    let p0 = (2.0 * energy * (1.0 - nu)).sqrt();
    let x0 = x - p0 * t0;
    let big_t_asymptotic = -2.0 * x0.im / p0;
    let d = t1 - t0;
    let big_t = 2.0 * (t1.im - d.im) + (2.0 / energy).sqrt() * sa * yp.im;
    // y = a e^{−it} + ā e^{it} in the initial region
    let a = (y + c(0.0, 1.0) * yd) / 2.0 * (c(0.0, 1.0) * t0).exp();
    let abar = (y - c(0.0, 1.0) * yd) / 2.0 * (c(0.0, -1.0) * t0).exp();
    let n = nu * energy;
    let theta = if nu > 0.0 {
        (abar / a.conj()).norm().ln() - big_t
    } else {
        f64::INFINITY
    };
    let f = p0p.im - energy * big_t - if nu > 0.0 { n * theta } else { 0.0 };
    MatchingSolution {
        energy,
        nu,
        t0,
        t1,
        phi1,
        tau: d.re,
        delta_t: d.im,
        tau1: t1.re,
        big_t1: t1.im,
        p0_prime: p0p,
        x0_prime: x0p,
        a_prime: ap,
        abar_prime: abp,
        big_t,
        big_t_asymptotic,
        theta,
        f,
    }
}

/// Solves the exact matching system by complex Newton from `seed = (t₀, t₁)`.
pub fn solve_exact(
    params: &ModelParams,
    energy: f64,
    nu: f64,
    seed: (Complex64, Complex64),
) -> Result<MatchingSolution> {
    params.validate()?;
    if !(energy > 0.0 && (0.0..1.0).contains(&nu)) {
        return Err(Error::InvalidInput(format!("E = {energy}, nu = {nu}")));
    }
    let cfg = RootConfig::with_tolerance(1e-12);
    let z = complex_newton(
        |z| exact_residual(params, energy, nu, z[0], z[1]).to_vec(),
        &[seed.0, seed.1],
        &cfg,
    )?;
    let r = exact_residual(params, energy, nu, z[0], z[1]);
    let rn = r[0].norm().max(r[1].norm());
    if rn > RESIDUAL_TOLERANCE {
        return Err(Error::ResidualTooLarge { residual: rn });
    }
    if z[1].im >= 0.0 {
        return Err(Error::BranchViolation { t1: z[1].im });
    }
    Ok(derive(params, energy, nu, z[0], z[1]))
}

/// Seed (t₀, t₁) for the exact system built from a reduced solution.
pub fn exact_seed(params: &ModelParams, tau: f64, delta_t: f64) -> (Complex64, Complex64) {
    let (sb, cb) = params.beta.sin_cos();
    let k = params.alpha / params.beta.tan();
    let ch = ((1.0 + k * tau.cos() * delta_t.exp()) / sb).max(1.0);
    let big_t1 = -ch.acosh() / cb;
    let tau1 = -(1.0 / cb - delta_t / (big_t1 * cb).tanh()) / (tau * cb);
    let t1 = c(tau1, big_t1);
    (t1 - c(tau, delta_t), t1)
}

/// Residuals of the reduced system.
pub fn reduced_residual(params: &ModelParams, energy: f64, tau: f64, delta_t: f64) -> [f64; 2] {
    let k = params.alpha / params.beta.tan();
    [
        1.0 - tau * (2.0 * energy).sqrt() - k * tau.cos() * delta_t.exp(),
        (1.0 + delta_t) * (-delta_t).exp() - k * tau * tau.sin(),
    ]
}

pub fn solve_reduced(params: &ModelParams, energy: f64, seed: (f64, f64)) -> Result<(f64, f64)> {
    let cfg = RootConfig::with_tolerance(1e-13);
    let x = real_newton(
        |x| reduced_residual(params, energy, x[0], x[1]).to_vec(),
        &[seed.0, seed.1],
        &cfg,
    )?;
    Ok((x[0], x[1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bands {
    pub n1: u32,
    /// (n, δτ_n) for n₁ ≤ n ≤ n_max
    pub widths: Vec<(u32, f64)>,
    pub first_band: (f64, f64),
}

fn check_small_alpha(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if !(params.alpha > 0.0 && params.alpha < 0.2) {
        return Err(Error::OutOfDomain {
            what: "alpha",
            value: params.alpha,
        });
    }
    Ok(())
}

/// n₁ = [tanβ/(2πα) + 1/2] + 1
pub fn first_local_index(params: &ModelParams) -> u32 {
    (params.beta.tan() / (2.0 * PI * params.alpha) + 0.5).floor() as u32 + 1
}

/// δτ_n = arcsin(tanβ/(2πα(n − 1/2)))
pub fn band_half_width(params: &ModelParams, n: u32) -> f64 {
    let s = params.beta.tan() / (2.0 * PI * params.alpha * (n as f64 - 0.5));
    s.min(1.0).asin()
}

/// Printed τ-interval of a branch.
pub fn band(params: &ModelParams, kind: BranchKind) -> (f64, f64) {
    let n1 = first_local_index(params);
    match kind {
        BranchKind::Global => (0.0, 2.0 * PI * (n1 as f64 - 1.0) + band_half_width(params, n1)),
        BranchKind::Local(n) => {
            let d = band_half_width(params, n);
            (2.0 * PI * n as f64 - PI - d, 2.0 * PI * n as f64 + d)
        }
    }
}

pub fn enumerate_bands(params: &ModelParams, n_max: u32) -> Result<Bands> {
    check_small_alpha(params)?;
    let n1 = first_local_index(params);
    let widths = (n1..=n_max).map(|n| (n, band_half_width(params, n))).collect();
    Ok(Bands {
        n1,
        widths,
        first_band: band(params, BranchKind::Global),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub energy: f64,
    pub tau: f64,
    pub delta_t: f64,
    pub f0: f64,
    /// −dF₀/dE
    pub big_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TunnelBranch {
    pub kind: BranchKind,
    pub band: (f64, f64),
    /// Sorted by increasing energy.
    pub samples: Vec<BranchSample>,
}

impl TunnelBranch {
    pub fn min_delta_t(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.delta_t).reduce(f64::min)
    }
}

/// τ·sinτ < tanβ/α, implied by the second reduced equation.
pub fn in_band(params: &ModelParams, tau: f64) -> bool {
    tau > 0.0 && tau * tau.sin() <= params.beta.tan() / params.alpha
}

/// F₀ and the printed dF₀/dE for a reduced solution.
///
/// F₀ = E(f_β(0) − 4α·cotβ·cosτ·ΔT·e^{ΔT}), dF₀/dE = f_β(0) + 2(ΔT + 1).
pub fn suppression_from_solution(params: &ModelParams, energy: f64, tau: f64, delta_t: f64) -> Result<(f64, f64)> {
    let r = reduced_residual(params, energy, tau, delta_t);
    let rn = r[0].abs().max(r[1].abs());
    if !(rn <= RESIDUAL_TOLERANCE) {
        return Err(Error::InvalidSample { residual: rn });
    }
    Ok(reduced_suppression(params, energy, tau, delta_t))
}

fn reduced_suppression(params: &ModelParams, energy: f64, tau: f64, delta_t: f64) -> (f64, f64) {
    let f0 = f_at_zero(params.beta);
    let k = params.alpha / params.beta.tan();
    let f = energy * (f0 - 4.0 * k * tau.cos() * delta_t * delta_t.exp());
    (f, f0 + 2.0 * (delta_t + 1.0))
}

/// Continues one branch of the reduced system over `grid`.
///
/// The global branch is seeded at the highest energy with (1/√(2E), −1) and
/// continued downwards until ΔT exceeds the cutoff; local branches are seeded
/// at the lowest energy with (2πn, ln(tanβ/α)) and continued upwards. A
/// branch that is lost ends there.
pub fn solve_branch(params: &ModelParams, kind: BranchKind, grid: &[f64]) -> Result<TunnelBranch> {
    check_small_alpha(params)?;
    crate::numerics::check_monotone(grid)?;
    if grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("energies must be positive".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (walk, seed) = match kind {
        BranchKind::Global => {
            let top = *sorted.last().unwrap();
            sorted.reverse();
            (sorted, (1.0 / (2.0 * top).sqrt(), -1.0))
        }
        BranchKind::Local(n) => {
            if n < first_local_index(params) {
                return Err(Error::InvalidInput(format!("no local branch n = {n}")));
            }
            (sorted, (2.0 * PI * n as f64, (params.beta.tan() / params.alpha).ln()))
        }
    };
    let mut first = true;
    let solver = |e: f64, s: &(f64, f64)| -> Result<(f64, f64)> {
        let x = solve_reduced(params, e, *s)?;
        let jumped = (x.0 - s.0).abs() > CONTINUATION_JUMP || (x.1 - s.1).abs() > CONTINUATION_JUMP;
        if (jumped && !first) || !in_band(params, x.0) {
            return Err(Error::BranchLost { parameter: e });
        }
        first = false;
        Ok(x)
    };
    let points = match continuation_scan(solver, &walk, seed) {
        Ok(p) => p,
        Err(lost) => lost.points,
    };
    let mut samples: Vec<BranchSample> = Vec::with_capacity(points.len());
    for (e, (tau, dt)) in points {
        if kind == BranchKind::Global && dt > GLOBAL_DELTA_T_CUTOFF {
            break;
        }
        let (f0, d) = reduced_suppression(params, e, tau, dt);
        samples.push(BranchSample {
            energy: e,
            tau,
            delta_t: dt,
            f0,
            big_t: -d,
        });
    }
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(TunnelBranch {
        kind,
        band: band(params, kind),
        samples,
    })
}

/// Refines every sample of a branch through the exact matching system at
/// ν = 0, continuing the exact solution along the branch.
pub fn refine_exact(params: &ModelParams, branch: &TunnelBranch) -> Result<Vec<MatchingSolution>> {
    let mut out = Vec::with_capacity(branch.samples.len());
    let mut prev: Option<(Complex64, Complex64)> = None;
    let mut order: Vec<usize> = (0..branch.samples.len()).collect();
    if branch.kind == BranchKind::Global {
        order.reverse();
    }
    for i in order {
        let s = &branch.samples[i];
        let seed = prev.unwrap_or_else(|| exact_seed(params, s.tau, s.delta_t));
        let sol = solve_exact(params, s.energy, 0.0, seed)
            .or_else(|_| solve_exact(params, s.energy, 0.0, exact_seed(params, s.tau, s.delta_t)))?;
        prev = Some((sol.t0, sol.t1));
        out.push(sol);
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TunnelOptima {
    /// (n, E′_n)
    pub optima: Vec<(u32, f64)>,
    /// n₀′ from the printed bracket formula.
    pub n0_prime: u32,
}

/// E′_n = (1 + 2α·e^{−1}·cotβ)/(8π²(n − 1/2)²)
pub fn optimal_energy(params: &ModelParams, n: u32) -> f64 {
    let h = n as f64 - 0.5;
    (1.0 + 2.0 * params.alpha / EULER / params.beta.tan()) / (8.0 * PI * PI * h * h)
}

/// n₀′ = [tanβ/(4πα)·f_β(0)·exp(1 + f_β(0)/2) + 1/2] + 1
pub fn n0_prime(params: &ModelParams) -> u32 {
    let f0 = f_at_zero(params.beta);
    (params.beta.tan() / (4.0 * PI * params.alpha) * f0 * (1.0 + f0 / 2.0).exp() + 0.5).floor() as u32 + 1
}

pub fn tunneling_optima(params: &ModelParams, n_max: u32) -> Result<TunnelOptima> {
    check_small_alpha(params)?;
    let optima = (first_local_index(params)..=n_max)
        .map(|n| (n, optimal_energy(params, n)))
        .collect();
    Ok(TunnelOptima {
        optima,
        n0_prime: n0_prime(params),
    })
}

/// First local branch whose ΔT reaches −1 − f_β(0)/2.
pub fn observed_n0_prime(params: &ModelParams, branches: &[TunnelBranch]) -> Option<u32> {
    let level = -1.0 - f_at_zero(params.beta) / 2.0;
    branches
        .iter()
        .filter_map(|b| match b.kind {
            BranchKind::Local(n) if b.min_delta_t().is_some_and(|d| d <= level) => Some(n),
            _ => None,
        })
        .min()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub energy: f64,
    pub f0: f64,
    pub delta_t: f64,
    pub kind: BranchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuppressionCurve {
    /// Sorted by increasing energy.
    pub points: Vec<CurvePoint>,
    pub switch_energies: Vec<f64>,
}

impl SuppressionCurve {
    /// Interior local minima of F₀/E as (index, energy).
    pub fn local_minima(&self) -> Vec<(usize, f64)> {
        let r: Vec<f64> = self.points.iter().map(|p| p.f0 / p.energy).collect();
        (1..r.len().saturating_sub(1))
            .filter(|&i| r[i] < r[i - 1] && r[i] < r[i + 1])
            .map(|i| (i, self.points[i].energy))
            .collect()
    }

    pub fn is_switch(&self, i: usize) -> bool {
        i + 1 < self.points.len() && self.points[i].kind != self.points[i + 1].kind
    }
}

fn branch_rank(kind: BranchKind) -> u32 {
    match kind {
        BranchKind::Global => 0,
        BranchKind::Local(n) => n,
    }
}

/// Glues branches into one curve.
///
/// Descending in energy the curve starts on the global branch and moves to
/// the next local branch at the first energy where that branch is lower,
/// never returning. All branches must share the same energy grid.
pub fn glue_branches(branches: &[TunnelBranch]) -> Result<SuppressionCurve> {
    let mut order: Vec<&TunnelBranch> = branches.iter().filter(|b| !b.samples.is_empty()).collect();
    order.sort_by_key(|b| branch_rank(b.kind));
    if order.first().map(|b| b.kind) != Some(BranchKind::Global) {
        return Err(Error::InvalidInput("gluing needs a non-empty global branch".into()));
    }
    let maps: Vec<HashMap<u64, &BranchSample>> = order
        .iter()
        .map(|b| b.samples.iter().map(|s| (s.energy.to_bits(), s)).collect())
        .collect();
    let mut energies: Vec<f64> = order.iter().flat_map(|b| b.samples.iter().map(|s| s.energy)).collect();
    energies.sort_by(|a, b| b.total_cmp(a));
    energies.dedup();

    let mut cur = 0;
    let mut points = Vec::with_capacity(energies.len());
    let mut switch_energies = Vec::new();
    for e in energies {
        let key = e.to_bits();
        let here = maps[cur].get(&key);
        let next = maps.get(cur + 1).and_then(|m| m.get(&key));
        let take_next = match (here, next) {
            (Some(h), Some(n)) => n.f0 < h.f0,
            (None, Some(_)) => true,
            _ => false,
        };
        if take_next {
            cur += 1;
            switch_energies.push(e);
        }
        let Some(s) = maps[cur].get(&key) else {
            if points.is_empty() {
                continue;
            }
            return Err(Error::CoverageGap { energy: e });
        };
        if !(s.f0 > 0.0) {
            return Err(Error::UnitarityViolation { energy: e, f0: s.f0 });
        }
        points.push(CurvePoint {
            energy: e,
            f0: s.f0,
            delta_t: s.delta_t,
            kind: order[cur].kind,
        });
    }
    points.reverse();
    Ok(SuppressionCurve {
        points,
        switch_energies,
    })
}

/// Solves the global branch and every local branch reachable on `grid`,
/// in parallel.
pub fn solve_all_branches(params: &ModelParams, grid: &[f64]) -> Result<Vec<TunnelBranch>> {
    use rayon::prelude::*;
    check_small_alpha(params)?;
    let e_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let n1 = first_local_index(params);
    let n_max = ((1.0 / (2.0 * e_min).sqrt()) / (2.0 * PI)).floor() as u32 + 2;
    let kinds: Vec<BranchKind> = std::iter::once(BranchKind::Global)
        .chain((n1..=n_max.max(n1)).map(BranchKind::Local))
        .collect();
    let branches: Vec<TunnelBranch> = kinds
        .par_iter()
        .map(|&k| solve_branch(params, k, grid))
        .collect::<Result<_>>()?;
    Ok(branches.into_iter().filter(|b| !b.samples.is_empty()).collect())
}

/// Default grid: 2000 logarithmic points over [1e-4, 5e-2].
pub fn default_grid() -> Vec<f64> {
    crate::numerics::geomspace(1e-4, 5e-2, 2000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> ModelParams {
        ModelParams::two_turn(PI / 30.0, PI / 3.0)
    }

    #[test]
    fn bands_match_formula() {
        let b = enumerate_bands(&reference_params(), 8).unwrap();
        assert_eq!(b.n1, 4);
        // arcsin(0.7521147)
        assert!((b.widths[0].1 - 0.8512651).abs() < 1e-7);
        assert_eq!(first_local_index(&ModelParams::two_turn(PI / 10.0, PI / 3.0)), 2);
    }

    #[test]
    fn reduced_residual_at_delta_t_minus_one() {
        let p = reference_params();
        let tau = 2.7;
        let r = reduced_residual(&p, 1e-3, tau, -1.0);
        let k = p.alpha / p.beta.tan();
        assert!((r[1] + k * tau * tau.sin()).abs() < 1e-15);
    }

    #[test]
    fn optimal_energy_four() {
        assert!((optimal_energy(&reference_params(), 4) / 1.07989e-3 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exact_solution_residual_and_seed() {
        let p = reference_params();
        let x = solve_reduced(&p, 0.03, (1.0 / 0.06f64.sqrt(), -1.0)).unwrap();
        let sol = solve_exact(&p, 0.03, 0.0, exact_seed(&p, x.0, x.1)).unwrap();
        let r = exact_residual(&p, 0.03, 0.0, sol.t0, sol.t1);
        assert!(r[0].norm() < 1e-10 && r[1].norm() < 1e-10);
        assert!((sol.big_t - sol.big_t_asymptotic).abs() < 1e-8 * sol.big_t.abs().max(1.0));
        let bumped = exact_residual(&p, 0.03, 0.0, sol.t0, sol.t1 + 1e-3);
        assert!(bumped[0].norm().max(bumped[1].norm()) >= 1e-5);
    }

    #[test]
    fn invalid_sample_rejected() {
        let p = reference_params();
        assert!(matches!(
            suppression_from_solution(&p, 1e-3, 1.0, 0.0),
            Err(Error::InvalidSample { .. })
        ));
    }
}
