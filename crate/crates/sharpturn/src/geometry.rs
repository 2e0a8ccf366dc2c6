//! Waveguide functions, coordinate frames and the smoothening profile.
//!
//! The one-turn model is the `alpha == 0` case with the turn at the origin.
//! In the two-turn model the first turn sits at the origin and the second at
//! x′ = 1 (lengths are measured in units of L).

use serde::{Deserialize, Serialize};

use crate::numerics::{bracket_root, RootConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
    /// Physical distance between the turns. Internally every length is
    /// already divided by it.
    #[serde(rename = "L", default = "unit")]
    pub length_scale: f64,
    #[serde(default)]
    pub b: f64,
}

fn unit() -> f64 {
    1.0
}

impl ModelParams {
    pub fn one_turn(beta: f64) -> Self {
        ModelParams {
            beta,
            alpha: 0.0,
            length_scale: 1.0,
            b: 0.0,
        }
    }

    pub fn two_turn(alpha: f64, beta: f64) -> Self {
        ModelParams {
            beta,
            alpha,
            length_scale: 1.0,
            b: 0.0,
        }
    }

    pub fn with_b(self, b: f64) -> Self {
        ModelParams { b, ..self }
    }

    pub fn is_one_turn(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_sharp(&self) -> bool {
        self.b == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.beta < std::f64::consts::FRAC_PI_2
            && self.alpha >= 0.0
            && self.alpha < self.beta
            && self.length_scale > 0.0
            && self.b >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid model parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// (x, y)
    Initial,
    /// (x′, y′), rotated by α
    Intermediate,
    /// (ξ, η), rotated by β and shifted to the second turn
    Final,
}

impl Frame {
    fn name(self) -> &'static str {
        match self {
            Frame::Initial => "initial",
            Frame::Intermediate => "intermediate",
            Frame::Final => "final",
        }
    }
}

/// Position and velocity in some frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
}

impl PhasePoint {
    pub fn new(pos: [f64; 2], vel: [f64; 2]) -> Self {
        PhasePoint { pos, vel }
    }
}

fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    // coordinates of v in a frame rotated by +angle
    let (s, c) = angle.sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
}

impl ModelParams {
    /// Shift of the final-frame origin along x′.
    fn turn_shift(&self) -> f64 {
        if self.is_one_turn() {
            0.0
        } else {
            1.0
        }
    }

    fn up(&self, p: PhasePoint, from: Frame) -> PhasePoint {
        // one step towards the final frame
        match from {
            Frame::Initial => PhasePoint::new(rotate(p.pos, self.alpha), rotate(p.vel, self.alpha)),
            Frame::Intermediate => {
                let s = [p.pos[0] - self.turn_shift(), p.pos[1]];
                PhasePoint::new(rotate(s, -self.beta), rotate(p.vel, -self.beta))
            }
            Frame::Final => p,
        }
    }

    fn down(&self, p: PhasePoint, from: Frame) -> PhasePoint {
        match from {
            Frame::Final => {
                let r = rotate(p.pos, self.beta);
                PhasePoint::new([r[0] + self.turn_shift(), r[1]], rotate(p.vel, self.beta))
            }
            Frame::Intermediate => PhasePoint::new(rotate(p.pos, -self.alpha), rotate(p.vel, -self.alpha)),
            Frame::Initial => p,
        }
    }
}

fn level(f: Frame) -> u8 {
    match f {
        Frame::Initial => 0,
        Frame::Intermediate => 1,
        Frame::Final => 2,
    }
}

fn from_level(l: u8) -> Frame {
    match l {
        0 => Frame::Initial,
        1 => Frame::Intermediate,
        _ => Frame::Final,
    }
}

/// Maps a position+velocity pair between frames. Velocities are rotated but
/// not shifted.
pub fn transform_frame(params: &ModelParams, p: PhasePoint, from: Frame, to: Frame) -> Result<PhasePoint> {
    if params.is_one_turn() && (from == Frame::Intermediate || to == Frame::Intermediate) {
        return Err(Error::InvalidFrame(Frame::Intermediate.name()));
    }
    let mut cur = p;
    let mut l = level(from);
    let target = level(to);
    while l < target {
        cur = params.up(cur, from_level(l));
        l += 1;
    }
    while l > target {
        cur = params.down(cur, from_level(l));
        l -= 1;
    }
    Ok(cur)
}

/// Positions in all frames, for the waveguide evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Coords {
    pub x: f64,
    pub y: f64,
    pub xp: f64,
    pub yp: f64,
    pub xi: f64,
    pub eta: f64,
}

pub fn coords(params: &ModelParams, x: f64, y: f64) -> Coords {
    let [xp, yp] = rotate([x, y], params.alpha);
    let [xi, eta] = rotate([xp - params.turn_shift(), yp], -params.beta);
    Coords { x, y, xp, yp, xi, eta }
}

/// Smoothened step θ_b(z) = 1/(1 + e^{−z/b}); the sharp step for b = 0.
pub fn step(z: f64, b: f64) -> f64 {
    if b == 0.0 {
        if z > 0.0 {
            1.0
        } else if z < 0.0 {
            0.0
        } else {
            0.5
        }
    } else {
        logistic(z / b)
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// w(x, y); the potential is U = w²/2.
pub fn waveguide_value(params: &ModelParams, x: f64, y: f64) -> f64 {
    waveguide_with_gradient(params, x, y).0
}

/// w together with (∂w/∂x, ∂w/∂y).
pub fn waveguide_with_gradient(params: &ModelParams, x: f64, y: f64) -> (f64, [f64; 2]) {
    let c = coords(params, x, y);
    let b = params.b;
    let (sb, cb) = params.beta.sin_cos();
    // ξ and η are (x, y) rotated by α − β
    let (sab, cab) = (params.beta - params.alpha).sin_cos();
    let dxi = [cab, -sab];
    let deta = [sab, cab];
    // derivative of θ_b(−ξ) with respect to ξ
    let p = step(-c.xi, b);
    let dp = if b == 0.0 { 0.0 } else { -p * (1.0 - p) / b };

    if params.is_one_turn() {
        let w = c.eta * cb - c.xi * sb * p;
        let w_xi = -sb * (p + c.xi * dp);
        let w_eta = cb;
        return (w, [w_xi * dxi[0] + w_eta * deta[0], w_xi * dxi[1] + w_eta * deta[1]]);
    }

    let (sa, ca) = params.alpha.sin_cos();
    let q = step(c.xp, b);
    let dq = if b == 0.0 { 0.0 } else { q * (1.0 - q) / b };
    let dxp = [ca, sa];
    let dyp = [-sa, ca];
    let g = (1.0 - q) * c.y + q * c.yp * ca;
    let far = c.eta * ca * cb;
    let w = p * g + (1.0 - p) * far;
    let mut grad = [0.0; 2];
    for k in 0..2 {
        let dy = if k == 1 { 1.0 } else { 0.0 };
        let qk = dq * dxp[k];
        let gk = -qk * c.y + (1.0 - q) * dy + qk * c.yp * ca + q * dyp[k] * ca;
        let pk = dp * dxi[k];
        grad[k] = pk * g + p * gk - pk * far + (1.0 - p) * deta[k] * ca * cb;
    }
    (w, grad)
}

/// The profile v(ψ) = ψ·tanβ/(1 + e^ψ) of the smoothened turn, with
/// w = cosβ·(η − b·v(ξ/b)) near the line ξ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothProfile {
    pub tan_beta: f64,
    pub psi0: f64,
}

impl SmoothProfile {
    pub fn v(&self, psi: f64) -> f64 {
        self.tan_beta * psi * logistic(-psi)
    }

    pub fn dv(&self, psi: f64) -> f64 {
        let s = logistic(-psi);
        self.tan_beta * s * (1.0 - psi * (1.0 - s))
    }

    pub fn d2v(&self, psi: f64) -> f64 {
        let s = logistic(-psi);
        let s1 = s * (1.0 - s);
        self.tan_beta * (-2.0 * s1 - psi * s1 * (2.0 * s - 1.0))
    }
}

/// Builds the smoothening profile; ψ₀ is the maximum of v.
pub fn smooth_profile(params: &ModelParams) -> Result<SmoothProfile> {
    if params.b <= 0.0 {
        return Err(Error::SharpModel);
    }
    let psi0 = bracket_root(
        |p| 1.0 + p.exp() - p * p.exp(),
        0.5,
        2.0,
        &RootConfig::with_tolerance(1e-15),
    )?;
    Ok(SmoothProfile {
        tan_beta: params.beta.tan(),
        psi0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn far_initial_region() {
        let p = ModelParams::one_turn(PI / 3.0);
        assert!((waveguide_value(&p, -5.0, 0.3) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn final_region_one_turn() {
        let p = ModelParams::one_turn(PI / 3.0);
        let (x, y) = (2.0, 0.1);
        let c = coords(&p, x, y);
        assert!(c.xi > 0.0);
        assert!((waveguide_value(&p, x, y) - c.eta * (PI / 3.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn intermediate_axis() {
        let p = ModelParams::two_turn(PI / 30.0, PI / 3.0);
        let a = PI / 30.0;
        let xp = 0.4;
        let (x, y) = (xp * a.cos(), xp * a.sin());
        assert!(waveguide_value(&p, x, y).abs() < 1e-15);
    }

    #[test]
    fn frame_examples() {
        let p = ModelParams::two_turn(PI / 30.0, PI / 3.0);
        let o = transform_frame(
            &p,
            PhasePoint::new([0.0, 0.0], [0.0, 0.0]),
            Frame::Initial,
            Frame::Intermediate,
        )
        .unwrap();
        assert_eq!(o.pos, [0.0, 0.0]);
        let f = transform_frame(
            &p,
            PhasePoint::new([1.0, 0.0], [0.0, 0.0]),
            Frame::Intermediate,
            Frame::Final,
        )
        .unwrap();
        assert!(f.pos[0].abs() < 1e-16 && f.pos[1].abs() < 1e-16);
        let r = transform_frame(
            &p,
            PhasePoint::new([1.0, 0.0], [0.0, 0.0]),
            Frame::Initial,
            Frame::Intermediate,
        )
        .unwrap();
        assert!((r.pos[0] - (PI / 30.0).cos()).abs() < 1e-15);
        assert!((r.pos[1] + (PI / 30.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn one_turn_has_no_intermediate_frame() {
        let p = ModelParams::one_turn(PI / 3.0);
        let e = transform_frame(
            &p,
            PhasePoint::new([0.0; 2], [0.0; 2]),
            Frame::Initial,
            Frame::Intermediate,
        );
        assert_eq!(e.unwrap_err(), Error::InvalidFrame("intermediate"));
    }

    #[test]
    fn profile() {
        let p = ModelParams::one_turn(PI / 3.0).with_b(1e-3);
        let s = smooth_profile(&p).unwrap();
        assert!((s.psi0 - 1.2785).abs() < 1e-3);
        assert_eq!(s.v(0.0), 0.0);
        assert!(s.d2v(s.psi0) < 0.0);
        assert!(s.dv(s.psi0).abs() < 1e-14);
        assert_eq!(
            smooth_profile(&ModelParams::one_turn(1.0)).unwrap_err(),
            Error::SharpModel
        );
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let s = SmoothProfile {
            tan_beta: 3f64.sqrt(),
            psi0: 1.2785,
        };
        for &x in &[-3.0, -0.5, 0.0, 0.7, 1.3, 4.0] {
            let h = 1e-5;
            let d1 = (s.v(x + h) - s.v(x - h)) / (2.0 * h);
            let d2 = (s.dv(x + h) - s.dv(x - h)) / (2.0 * h);
            assert!((d1 - s.dv(x)).abs() < 1e-9);
            assert!((d2 - s.d2v(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_one_turn_matches_profile_form() {
        let p = ModelParams::one_turn(PI / 3.0).with_b(0.01);
        let s = smooth_profile(&p).unwrap();
        let cb = (PI / 3.0).cos();
        for &(x, y) in &[(0.01, 0.02), (-0.03, 0.5), (0.2, -0.1)] {
            let c = coords(&p, x, y);
            let w = cb * (c.eta - p.b * s.v(c.xi / p.b));
            assert!((waveguide_value(&p, x, y) - w).abs() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_differences() {
        for p in [
            ModelParams::one_turn(PI / 3.0).with_b(0.05),
            ModelParams::two_turn(PI / 30.0, PI / 3.0).with_b(0.05),
            ModelParams::two_turn(0.3, 1.0).with_b(0.2),
        ] {
            for &(x, y) in &[(0.01, 0.02), (-0.03, 0.5), (0.9, 0.1), (1.1, -0.2), (0.5, 0.05)] {
                let (_, g) = waveguide_with_gradient(&p, x, y);
                let h = 1e-6;
                let gx = (waveguide_value(&p, x + h, y) - waveguide_value(&p, x - h, y)) / (2.0 * h);
                let gy = (waveguide_value(&p, x, y + h) - waveguide_value(&p, x, y - h)) / (2.0 * h);
                assert!((g[0] - gx).abs() < 1e-7 && (g[1] - gy).abs() < 1e-7, "{p:?} {x} {y}");
            }
        }
    }
}
