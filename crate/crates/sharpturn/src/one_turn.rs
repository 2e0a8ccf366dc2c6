//! Single sharp turn: critical data, the closed-form exponent f_β(ν) and
//! the complex matching solution.
//!
//! All quantities are for unit energy; F(E, N) = E·f_β(N/E).

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Complex reflection trajectory of the one-turn model at E = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneTurnSolution {
    pub nu: f64,
    /// t₁ = i·T₁ is the complex time at which the trajectory meets ξ = 0.
    pub t1_imag: f64,
    pub big_t: f64,
    /// +∞ at ν = 0.
    pub theta: f64,
    pub p0: f64,
    #[serde(skip)]
    pub a: Complex64,
    pub f: f64,
}

pub fn nu_critical(beta: f64) -> f64 {
    beta.cos().powi(2)
}

/// f_β(0) = −2 + (2/cosβ)·artanh(cosβ).
pub fn f_at_zero(beta: f64) -> f64 {
    let c = beta.cos();
    -2.0 + 2.0 / c * c.atanh()
}

fn check_domain(beta: f64, nu: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::OutOfDomain {
            what: "beta",
            value: beta,
        });
    }
    let ncr = nu_critical(beta);
    if !(0.0..=ncr).contains(&nu) {
        return Err(Error::OutOfDomain { what: "nu", value: nu });
    }
    Ok(ncr)
}

/// f_β(ν) = (2/cosβ)·{arsinh(√(ν_cr−ν)/sinβ) − ν·cosβ·arsinh(√(ν_cr−ν)/(sinβ√ν)) − √((ν_cr−ν)(1−ν))}.
pub fn suppression_closed_form(beta: f64, nu: f64) -> Result<f64> {
    let ncr = check_domain(beta, nu)?;
    if nu == 0.0 {
        return Ok(f_at_zero(beta));
    }
    let (s, c) = beta.sin_cos();
    let d = (ncr - nu).max(0.0).sqrt();
    let braces = (d / s).asinh() - nu * c * (d / (s * nu.sqrt())).asinh() - d * (1.0 - nu).sqrt();
    Ok(2.0 / c * braces)
}

/// F(E, N) = E·f_β(N/E).
pub fn suppression(beta: f64, energy: f64, n: f64) -> Result<f64> {
    Ok(energy * suppression_closed_form(beta, n / energy)?)
}

/// Solves the matching relations.
///
/// T₁ comes from sin(t₁cosβ) = −i√(ν_cr−ν)/sinβ with T₁ ≤ 0; T and θ then
/// follow from
/// T₁ − T/2 = −√((1−ν/cos²β)/(1−ν)) and
/// sinh(T₁ − (T+θ)/2) = −√(cos²β−ν)/(sinβ√ν).
pub fn solve_matching(beta: f64, nu: f64) -> Result<OneTurnSolution> {
    let ncr = check_domain(beta, nu)?;
    let (s, c) = beta.sin_cos();
    let d = (ncr - nu).max(0.0).sqrt();
    let t1 = -(d / s).asinh() / c;
    if t1 > 0.0 {
        return Err(Error::BranchViolation { t1 });
    }
    let big_t = 2.0 * t1 + 2.0 * ((1.0 - nu / (c * c)).max(0.0) / (1.0 - nu)).sqrt();
    let theta = if nu == 0.0 {
        f64::INFINITY
    } else {
        2.0 * t1 + 2.0 * (d / (s * nu.sqrt())).asinh() - big_t
    };
    let f = if nu == 0.0 { -big_t } else { -big_t - theta * nu };
    let closed = suppression_closed_form(beta, nu)?;
    if (f - closed).abs() > 1e-10 {
        return Err(Error::ResidualTooLarge {
            residual: (f - closed).abs(),
        });
    }
    let asym = matching_asymptotics(beta, nu)?;
    Ok(OneTurnSolution {
        nu,
        t1_imag: t1,
        big_t,
        theta,
        p0: asym.p0,
        a: asym.a,
        f,
    })
}

/// Initial-region asymptotics x = p₀t + x₀, y = a e^{−it} + ā e^{it} of the
/// complex trajectory that slides along ξ = 0 with η = (√2/cosβ)·sin(t·cosβ).
#[derive(Debug, Clone, Copy)]
pub struct Asymptotics {
    pub t1: Complex64,
    pub p0: f64,
    pub x0: Complex64,
    pub a: Complex64,
    pub abar: Complex64,
}

impl Asymptotics {
    /// T = −2·Im x₀/p₀.
    pub fn big_t(&self) -> f64 {
        -2.0 * self.x0.im / self.p0
    }

    /// θ from ā = a*·e^{T+θ}.
    pub fn theta(&self) -> f64 {
        (self.abar / self.a.conj()).ln().re - self.big_t()
    }
}

pub fn matching_asymptotics(beta: f64, nu: f64) -> Result<Asymptotics> {
    let ncr = check_domain(beta, nu)?;
    let (s, c) = beta.sin_cos();
    let t1 = Complex64::new(0.0, -(((ncr - nu).max(0.0)).sqrt() / s).asinh() / c);
    let amp = 2f64.sqrt() / c;
    let eta = amp * (t1 * c).sin();
    let deta = amp * c * (t1 * c).cos();
    let (x, y) = (eta * s, eta * c);
    let (vx, vy) = (deta * s, deta * c);
    let p0 = vx.re;
    let i = Complex64::i();
    Ok(Asymptotics {
        t1,
        p0,
        x0: x - p0 * t1,
        a: (y + i * vy) * (i * t1).exp() / 2.0,
        abar: (y - i * vy) * (-i * t1).exp() / 2.0,
    })
}

/// The real trajectory x = √2·t·sinβ, y = √2·sin t·cosβ at ν = ν_cr.
pub fn critical_trajectory(beta: f64, t: f64) -> [f64; 2] {
    let (s, c) = beta.sin_cos();
    [2f64.sqrt() * t * s, 2f64.sqrt() * t.sin() * c]
}

/// Velocity along [`critical_trajectory`].
pub fn critical_velocity(beta: f64, t: f64) -> [f64; 2] {
    let (s, c) = beta.sin_cos();
    [2f64.sqrt() * s, 2f64.sqrt() * t.cos() * c]
}
