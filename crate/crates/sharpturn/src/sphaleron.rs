//! Dynamics near a smoothened single turn.
//!
//! With ξ = bψ the waveguide is w = cosβ·(η − b·v(ψ)). The line ξ = bψ₀,
//! where v′ vanishes, carries the exact periodic orbit
//! η = A_η·sin(t·cosβ + φ_η) + b·v(ψ₀). Small deviations obey a Mathieu
//! equation in s = (t·cosβ + φ_η)/2 and are unstable.
//!
//! Everything here is integrated in deviation variables δψ = ψ − ψ₀ and
//! ρ = η − η_sp(t), so the orbit itself is an exact fixed point and
//! exponentially small offsets stay representable.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::classical::{propagate_smooth, LaunchSpec, Region, TOUCH_BAND};
use crate::geometry::{smooth_profile, transform_frame, waveguide_with_gradient, Frame, PhasePoint, SmoothProfile};
use crate::numerics::{bracket_root, golden_max, integrate_ode, Event, OdeConfig, RootConfig};
use crate::{Error, ModelParams, Result};

/// Smallest Mathieu parameter for which the WKB formula is trusted.
pub const MIN_Q: f64 = 25.0;
/// Default s₁.
pub const DEFAULT_S1: f64 = -0.5;

/// A_η giving unit energy.
pub fn default_amplitude(beta: f64) -> f64 {
    2f64.sqrt() / beta.cos()
}

/// Absolute tolerance tied to the size of the initial offset, which may be
/// hundreds of decades below one.
fn ode_cfg(scale: f64) -> OdeConfig {
    OdeConfig {
        rel_tol: 1e-12,
        abs_tol: (1e-14 * scale.abs()).max(1e-300),
        ..OdeConfig::default()
    }
}

fn one_turn_smooth(params: &ModelParams) -> Result<SmoothProfile> {
    params.validate()?;
    if !params.is_one_turn() {
        return Err(Error::InvalidInput(
            "the smoothened-turn analysis uses the one-turn model".into(),
        ));
    }
    smooth_profile(params)
}

/// v′(ψ₀ + δ) with v′(ψ₀) set to exactly zero.
fn dv_dev(prof: &SmoothProfile, d: f64) -> f64 {
    if d.abs() < 1e-6 {
        let h = 1e-4;
        let v3 = (prof.d2v(prof.psi0 + h) - prof.d2v(prof.psi0 - h)) / (2.0 * h);
        prof.d2v(prof.psi0) * d + 0.5 * v3 * d * d
    } else {
        prof.dv(prof.psi0 + d) - prof.dv(prof.psi0)
    }
}

/// v(ψ₀ + δ) − v(ψ₀)
fn v_dev(prof: &SmoothProfile, d: f64) -> f64 {
    if d.abs() < 1e-6 {
        0.5 * prof.d2v(prof.psi0) * d * d
    } else {
        prof.v(prof.psi0 + d) - prof.v(prof.psi0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphaleronOrbit {
    pub a_eta: f64,
    pub phi_eta: f64,
    pub psi0: f64,
    pub b: f64,
    pub beta: f64,
    /// Largest equation-of-motion residual found over one period.
    pub residual: f64,
}

impl SphaleronOrbit {
    pub fn xi(&self) -> f64 {
        self.b * self.psi0
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.beta.cos()
    }

    /// (ξ, η) with velocities at time t.
    pub fn state(&self, t: f64) -> PhasePoint {
        let cb = self.beta.cos();
        let prof = SmoothProfile {
            tan_beta: self.beta.tan(),
            psi0: self.psi0,
        };
        let ph = t * cb + self.phi_eta;
        PhasePoint::new(
            [self.xi(), self.a_eta * ph.sin() + self.b * prof.v(self.psi0)],
            [0.0, self.a_eta * cb * ph.cos()],
        )
    }

    pub fn energy(&self) -> f64 {
        0.5 * (self.a_eta * self.beta.cos()).powi(2)
    }
}

/// Builds the periodic orbit on the line ξ = bψ₀ and checks it against the
/// waveguide force over one period.
pub fn build_sphaleron(params: &ModelParams, a_eta: f64, phi_eta: f64) -> Result<SphaleronOrbit> {
    let prof = one_turn_smooth(params)?;
    if !(a_eta > 0.0) {
        return Err(Error::InvalidInput(format!("A_eta = {a_eta}")));
    }
    let mut orbit = SphaleronOrbit {
        a_eta,
        phi_eta,
        psi0: prof.psi0,
        b: params.b,
        beta: params.beta,
        residual: 0.0,
    };
    let cb = params.beta.cos();
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = orbit.period() * k as f64 / 200.0;
        let fs = orbit.state(t);
        let accel = [0.0, -a_eta * cb * cb * (t * cb + phi_eta).sin()];
        let p = transform_frame(params, PhasePoint::new(fs.pos, accel), Frame::Final, Frame::Initial)?;
        let (w, g) = waveguide_with_gradient(params, p.pos[0], p.pos[1]);
        for i in 0..2 {
            worst = worst.max((p.vel[i] + w * g[i]).abs());
        }
    }
    orbit.residual = worst;
    if worst > 1e-8 {
        return Err(Error::ResidualTooLarge { residual: worst });
    }
    Ok(orbit)
}

/// q = −2·v″(ψ₀)·A_η/b
pub fn mathieu_q(params: &ModelParams, a_eta: f64) -> Result<f64> {
    let prof = one_turn_smooth(params)?;
    Ok(-2.0 * prof.d2v(prof.psi0) * a_eta / params.b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMode {
    /// Offset δψ at s = π/4 that grows to δψ(s₁) = −1.
    pub amplitude: f64,
    pub mathieu_q: f64,
    pub s1: f64,
    /// (s, W(s)) samples on [s₁, π/2].
    pub w: Vec<(f64, f64)>,
}

fn sqrt_sin_integral(from: f64, to: f64) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let sol = integrate_ode(
        |s, _, d: &mut [f64]| d[0] = (2.0 * s).sin().abs().sqrt(),
        &[0.0],
        (from, to),
        &[],
        &OdeConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: Some(0.01),
            ..OdeConfig::default()
        },
    )?;
    Ok(sol.final_state().1[0])
}

/// W(s) = √(2q)·∫_{π/4}^{s} √(sin 2s′) ds′ for 0 ≤ s ≤ π/2; for s < 0 the
/// growth exponent |W(s) − W(0)| = √(2q)·∫_{s}^{0} √(−sin 2s′) ds′.
pub fn wkb_exponent(mode: &LinearMode, s: f64) -> Result<f64> {
    wkb_at(mode.mathieu_q, s)
}

fn wkb_at(q: f64, s: f64) -> Result<f64> {
    if !(q > MIN_Q) {
        return Err(Error::SmallQ { q });
    }
    let k = (2.0 * q).sqrt();
    if s < 0.0 {
        Ok(k * sqrt_sin_integral(s, 0.0)?.abs())
    } else if s <= FRAC_PI_2 {
        Ok(k * sqrt_sin_integral(FRAC_PI_4, s)?)
    } else {
        Err(Error::OutOfDomain { what: "s", value: s })
    }
}

/// Growth of δψ″ + 2q·sin(2s)·δψ = 0 between s_a and s_b (both negative),
/// as ln|δψ(s_b)/δψ(s_a)| from the ODE and from the WKB exponent.
pub fn linear_growth(q: f64, s_a: f64, s_b: f64) -> Result<(f64, f64)> {
    if !(s_b < s_a && s_a < 0.0 && s_b > -FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "need −π/2 < s_b < s_a < 0, got {s_a}, {s_b}"
        )));
    }
    let field = |s: f64, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = -2.0 * q * (2.0 * s).sin() * y[0];
    };
    // start on the growing solution with WKB initial data
    let k = (2.0 * q).sqrt();
    let sol_a = integrate_ode(field, &[1.0, -k], (0.0, s_a), &[], &ode_cfg(1.0))?;
    let ya = sol_a.final_state().1.to_vec();
    let sol_b = integrate_ode(field, &ya, (s_a, s_b), &[], &ode_cfg(1.0))?;
    let yb = sol_b.final_state().1;
    let ode = (yb[0] / ya[0]).abs().ln();
    let wkb = wkb_at(q, s_b)? - wkb_at(q, s_a)?;
    Ok((ode, wkb))
}

/// Nonlinear ψ equation ψ″ = (4/b)·A_η·sin(2s)·v′(ψ), in δψ.
fn psi_field<'a>(prof: &'a SmoothProfile, a_eta: f64, b: f64) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    move |s, y, d| {
        d[0] = y[1];
        d[1] = 4.0 / b * a_eta * (2.0 * s).sin() * dv_dev(prof, y[0]);
    }
}

fn shoot(prof: &SmoothProfile, a_eta: f64, b: f64, s1: f64, delta: f64) -> Result<f64> {
    let sol = integrate_ode(
        psi_field(prof, a_eta, b),
        &[delta, 0.0],
        (FRAC_PI_4, s1),
        &[],
        &ode_cfg(delta),
    )?;
    Ok(sol.final_state().1[0])
}

/// Offset at the symmetric point s = π/4 whose backward evolution reaches
/// δψ(s₁) = −1.
pub fn linear_mode(params: &ModelParams, a_eta: f64, s1: f64) -> Result<LinearMode> {
    let prof = one_turn_smooth(params)?;
    let q = mathieu_q(params, a_eta)?;
    if !(q > MIN_Q) {
        return Err(Error::SmallQ { q });
    }
    if !(s1 < 0.0 && s1 > -FRAC_PI_2) {
        return Err(Error::OutOfDomain { what: "s1", value: s1 });
    }
    let b = params.b;
    // the linear response fixes the sign of the offset
    let probe = shoot(&prof, a_eta, b, s1, 1e-200)?;
    let sign = if probe > 0.0 { -1.0 } else { 1.0 };
    let target = |ln_d: f64| -> f64 {
        match shoot(&prof, a_eta, b, s1, sign * ln_d.exp()) {
            Ok(v) if v.is_finite() => v.max(-1e6) + 1.0,
            _ => -1e6,
        }
    };
    // the response is monotone only up to the first overshoot, so step up
    // from the linear regime until δψ(s₁) passes −1
    let mut lo = -600.0;
    let mut hi = lo;
    while target(hi) > 0.0 {
        lo = hi;
        hi += 2.0;
        if hi > 0.0 {
            return Err(Error::NoEscape);
        }
    }
    let ln_d = bracket_root(target, lo, hi, &RootConfig::with_tolerance(1e-13))?;
    let amplitude = sign * ln_d.exp();
    let mut w = Vec::new();
    for k in 0..=64 {
        let s = s1 + (FRAC_PI_2 - s1) * k as f64 / 64.0;
        w.push((s, wkb_at(q, s)?));
    }
    Ok(LinearMode {
        amplitude,
        mathieu_q: q,
        s1,
        w,
    })
}

/// Free motion y = √(2N)·sin(t + φ), x = x₀ + p·t in the initial region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sinusoid {
    pub energy: f64,
    pub excitation: f64,
    pub phase: f64,
    pub x0: f64,
    pub p: f64,
}

impl Sinusoid {
    fn from_state(t: f64, pos: [f64; 2], vel: [f64; 2]) -> Self {
        let excitation = 0.5 * (pos[1] * pos[1] + vel[1] * vel[1]);
        let energy = excitation + 0.5 * vel[0] * vel[0];
        Sinusoid {
            energy,
            excitation,
            phase: pos[1].atan2(vel[1]) - t,
            x0: pos[0] - vel[0] * t,
            p: vel[0],
        }
    }

    fn xi(&self, beta: f64, t: f64) -> f64 {
        let (sb, cb) = beta.sin_cos();
        let x = self.x0 + self.p * t;
        let y = (2.0 * self.excitation).sqrt() * (t + self.phase).sin();
        x * cb - y * sb
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectedOrbit {
    pub mode: LinearMode,
    pub orbit: SphaleronOrbit,
    /// Outgoing (backward in time) free motion.
    pub asymptotic: Sinusoid,
    /// Local maximum of ξ closest to zero for the asymptotic sinusoid
    /// continued through the sharp turn; zero for an exact touch.
    pub sharp_touch_gap: f64,
    /// max |ρ| over s₁ ≤ s ≤ π/4 on the full trajectory.
    pub max_rho: f64,
    /// max |δψ(π/2 − s) − δψ(s)| over matched samples of the ψ equation.
    pub symmetry_error: f64,
    /// Time at which ξ reaches −1 on the way out.
    pub exit_time: f64,
    /// (s, δψ, dδψ/ds) samples of the ψ equation on [s₁, π/4].
    pub psi_samples: Vec<(f64, f64, f64)>,
}

/// State (δψ, δψ̇, ρ, ρ̇) in t; exact for the smoothened single turn.
fn deviation_field<'a>(
    prof: &'a SmoothProfile,
    a_eta: f64,
    b: f64,
    beta: f64,
    phi: f64,
) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    let cb2 = beta.cos().powi(2);
    let cb = beta.cos();
    move |t, y, d| {
        let dv = v_dev(prof, y[0]);
        let u = a_eta * (t * cb + phi).sin() + y[2] - b * dv;
        d[0] = y[1];
        d[1] = cb2 * u * dv_dev(prof, y[0]) / b;
        d[2] = y[3];
        d[3] = -cb2 * (y[2] - b * dv);
    }
}

fn full_state(orbit: &SphaleronOrbit, params: &ModelParams, t: f64, y: &[f64]) -> Result<PhasePoint> {
    let sp = orbit.state(t);
    let fs = PhasePoint::new(
        [orbit.b * (orbit.psi0 + y[0]), sp.pos[1] + y[2]],
        [orbit.b * y[1], sp.vel[1] + y[3]],
    );
    transform_frame(params, fs, Frame::Final, Frame::Initial)
}

/// Symmetric reflected trajectory built from the sphaleron: the ψ equation
/// fixes the offset at the symmetric point, the full dynamics is then
/// integrated backwards until ξ = −1 and the free sinusoid is read off.
pub fn reflected_orbit(params: &ModelParams, s1: f64, a_eta: f64) -> Result<ReflectedOrbit> {
    let prof = one_turn_smooth(params)?;
    let b = params.b;
    if b > 1e-2 {
        return Err(Error::OutOfDomain { what: "b", value: b });
    }
    let phi = FRAC_PI_2;
    let orbit = build_sphaleron(params, a_eta, phi)?;
    let mode = linear_mode(params, a_eta, s1)?;
    let cb = params.beta.cos();

    // ψ equation, both directions from the symmetric point
    let back = integrate_ode(
        psi_field(&prof, a_eta, b),
        &[mode.amplitude, 0.0],
        (FRAC_PI_4, s1),
        &[],
        &ode_cfg(mode.amplitude),
    )?;
    let fwd = integrate_ode(
        psi_field(&prof, a_eta, b),
        &[mode.amplitude, 0.0],
        (FRAC_PI_4, FRAC_PI_2 - s1),
        &[],
        &ode_cfg(mode.amplitude),
    )?;
    let sample = |sol: &crate::numerics::OdeSolution, s: f64| -> Result<f64> {
        let r = integrate_ode(
            psi_field(&prof, a_eta, b),
            &sol.y[0],
            (sol.t[0], s),
            &[],
            &ode_cfg(mode.amplitude),
        )?;
        Ok(r.final_state().1[0])
    };
    let mut symmetry_error: f64 = 0.0;
    for k in 1..=8 {
        let s = FRAC_PI_4 + (s1 - FRAC_PI_4) * k as f64 / 8.0;
        let a = sample(&back, s)?;
        let m = sample(&fwd, FRAC_PI_2 - s)?;
        symmetry_error = symmetry_error.max((a - m).abs());
    }
    let psi_samples = back.t.iter().zip(&back.y).map(|(&s, y)| (s, y[0], y[1])).collect();

    // full dynamics backwards in t
    let t_s1 = (2.0 * s1 - phi) / cb;
    let xi_exit = -1.0;
    let psi0 = prof.psi0;
    let exit = Event::new(move |_, y: &[f64]| b * (psi0 + y[0]) - xi_exit).terminal();
    let span = (0.0, t_s1 - 40.0 * PI);
    let sol = integrate_ode(
        deviation_field(&prof, a_eta, b, params.beta, phi),
        &[mode.amplitude, 0.0, 0.0, 0.0],
        span,
        &[exit],
        &ode_cfg(mode.amplitude),
    )?;
    if sol.terminated_by.is_none() {
        return Err(Error::NoEscape);
    }
    let max_rho = sol
        .t
        .iter()
        .zip(&sol.y)
        .filter(|(&t, _)| t >= t_s1)
        .map(|(_, y)| y[2].abs())
        .fold(0.0, f64::max);
    let (t_exit, y_exit) = sol.final_state();
    let p = full_state(&orbit, params, t_exit, y_exit)?;
    let asymptotic = Sinusoid::from_state(t_exit, p.pos, p.vel);

    // local maxima of ξ for the free sinusoid continued through the sharp
    // turn; a touching sinusoid has one at ξ = 0
    let horizon = t_exit + (1.0 - asymptotic.x0 / asymptotic.p - t_exit).max(0.0) + 2.0 * PI;
    let n = 8000;
    let dt = (horizon - t_exit) / n as f64;
    let xi = |t: f64| asymptotic.xi(params.beta, t);
    let mut sharp_touch_gap = f64::INFINITY;
    for k in 1..n {
        let t = t_exit + dt * k as f64;
        if xi(t) >= xi(t - dt) && xi(t) >= xi(t + dt) {
            let (_, m) = golden_max(xi, t - dt, t + dt, 1e-12);
            if m.abs() < sharp_touch_gap.abs() {
                sharp_touch_gap = m;
            }
        }
    }

    Ok(ReflectedOrbit {
        mode,
        orbit,
        asymptotic,
        sharp_touch_gap,
        max_rho,
        symmetry_error,
        exit_time: t_exit,
        psi_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    pub delta: f64,
    /// Region the particle heads for once |δψ| exceeds 2.
    pub escaped_to: Region,
    /// Time from the perturbation until |δψ| = 2.
    pub divergence_time: f64,
    /// Sphaleron periods spent before diverging.
    pub periods_before_escape: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationRun {
    pub delta: f64,
    pub max_deviation: f64,
    pub report: Option<GrowthReport>,
}

/// Perturbs the orbit by δψ at s = π/2 and follows the full dynamics for up
/// to `periods` transverse periods.
pub fn perturbed_run(params: &ModelParams, a_eta: f64, delta: f64, periods: f64) -> Result<PerturbationRun> {
    let prof = one_turn_smooth(params)?;
    let orbit = build_sphaleron(params, a_eta, FRAC_PI_2)?;
    let t_start = (PI - FRAC_PI_2) / params.beta.cos();
    let t_end = t_start + periods * orbit.period();
    let escape = Event::new(|_, y: &[f64]| y[0].abs() - 2.0).terminal();
    let sol = integrate_ode(
        deviation_field(&prof, a_eta, params.b, params.beta, FRAC_PI_2),
        &[delta, 0.0, 0.0, 0.0],
        (t_start, t_end),
        &[escape],
        &ode_cfg(delta),
    )?;
    let max_deviation = sol.y.iter().map(|y| y[0].abs()).fold(0.0, f64::max);
    let report = sol.terminated_by.map(|_| {
        let (t, y) = sol.final_state();
        GrowthReport {
            delta,
            escaped_to: if y[0] < 0.0 { Region::Initial } else { Region::Final },
            divergence_time: t - t_start,
            periods_before_escape: (t - t_start) / orbit.period(),
        }
    });
    Ok(PerturbationRun {
        delta,
        max_deviation,
        report,
    })
}

/// Both signs of a 1e-6 offset must leave the orbit within 20 periods.
pub fn instability_check(params: &ModelParams, a_eta: f64) -> Result<[GrowthReport; 2]> {
    let mut out = Vec::with_capacity(2);
    for delta in [-1e-6, 1e-6] {
        let run = perturbed_run(params, a_eta, delta, 20.0)?;
        out.push(run.report.ok_or(Error::NoGrowth { periods: 20.0 })?);
    }
    Ok([out[0], out[1]])
}

/// Closest approach of the critical unit-energy trajectory to a smoothened
/// turn: ξ at the first local maximum of ξ inside the touch band.
pub fn touch_distance(params: &ModelParams) -> Result<f64> {
    one_turn_smooth(params)?;
    let (sb, cb) = params.beta.sin_cos();
    let start_x = -5.0;
    // x = √2·t·sinβ, y = √2·cosβ·sin t
    let t0 = start_x / (2f64.sqrt() * sb);
    let launch = LaunchSpec {
        energy: 1.0,
        excitation: cb * cb,
        phase: t0,
        start_x,
    };
    let run = propagate_smooth(params, &launch, -t0 + 40.0)?;
    let first = run.outcome.touch_events.first().ok_or(Error::NoEscape)?;
    let c = crate::geometry::coords(params, first.position[0], first.position[1]);
    debug_assert!(c.xi.abs() < TOUCH_BAND);
    Ok(c.xi)
}

/// Exponent k in touch_distance ∝ b^k from two smoothening widths.
pub fn touch_scaling(beta: f64, b_lo: f64, b_hi: f64) -> Result<f64> {
    let lo = touch_distance(&ModelParams::one_turn(beta).with_b(b_lo))?;
    let hi = touch_distance(&ModelParams::one_turn(beta).with_b(b_hi))?;
    Ok((hi / lo).ln() / (b_hi / b_lo).ln())
}
