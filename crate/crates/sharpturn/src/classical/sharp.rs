use std::f64::consts::TAU;

use super::{ClassicalState, GluingLine, LaunchSpec, OutcomeKind, Region, TouchEvent, TrajectoryOutcome};
use crate::geometry::{coords, transform_frame, Frame, ModelParams, PhasePoint};
use crate::numerics::{bracket_root, RootConfig};
use crate::{Error, Result};

/// Relative normal velocity below which a crossing counts as a tangency.
pub(crate) const TANGENCY_TOLERANCE: f64 = 1e-6;
/// Local maxima of a line function closer than this to zero are treated as
/// touches even when they do not cross.
const GRAZE_TOLERANCE: f64 = 1e-12;

/// g(τ) = c0 + c1·τ + c2·sin ωτ + c3·cos ωτ
#[derive(Debug, Clone, Copy)]
struct Wave {
    c: [f64; 4],
    w: f64,
}

impl Wave {
    fn g(&self, t: f64) -> f64 {
        let (s, c) = (self.w * t).sin_cos();
        self.c[0] + self.c[1] * t + self.c[2] * s + self.c[3] * c
    }

    fn dg(&self, t: f64) -> f64 {
        let (s, c) = (self.w * t).sin_cos();
        self.c[1] + self.w * (self.c[2] * c - self.c[3] * s)
    }

    /// Offsets of the first local maximum and first local minimum, or
    /// `None` when g is monotone.
    fn critical_offsets(&self) -> Option<(f64, f64)> {
        let r = self.c[2].hypot(self.c[3]);
        if self.w * r <= self.c[1].abs() {
            return None;
        }
        let a = (-self.c[1] / (self.w * r)).acos();
        let d = self.c[3].atan2(self.c[2]);
        Some(((a - d).rem_euclid(TAU) / self.w, (-a - d).rem_euclid(TAU) / self.w))
    }

    fn maxima_before(&self, tau: f64) -> u32 {
        match self.critical_offsets() {
            Some((m, _)) if tau > m => ((tau - m) * self.w / TAU).floor() as u32 + 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    tau: f64,
    dg: f64,
}

fn root_in(w: &Wave, lo: f64, hi: f64) -> f64 {
    let cfg = RootConfig {
        residual_tolerance: 1e-16,
        max_iterations: 200,
        jacobian_step: 1e-7,
    };
    bracket_root(|t| w.g(t), lo, hi, &cfg).unwrap_or(hi)
}

/// First time in (0, τ_max] at which g reaches zero from below, including
/// grazing maxima.
fn first_hit(w: &Wave, tau_max: f64) -> Option<Hit> {
    let g0 = w.g(0.0);
    if g0 > GRAZE_TOLERANCE || (g0 > -GRAZE_TOLERANCE && w.dg(0.0) > 0.0) {
        return Some(Hit {
            tau: 0.0,
            dg: w.dg(0.0),
        });
    }
    let (mut l, mut gl) = (0.0, g0.min(-f64::MIN_POSITIVE));
    let crit = w.critical_offsets();
    let period = TAU / w.w;
    let (mut next_max, mut next_min) = match crit {
        Some((m, n)) => (m, n),
        None => (f64::INFINITY, f64::INFINITY),
    };
    loop {
        let is_max = next_max <= next_min;
        let r = next_max.min(next_min).min(tau_max);
        let gr = w.g(r);
        if gl < 0.0 && gr >= 0.0 {
            let tau = root_in(w, l, r);
            return Some(Hit { tau, dg: w.dg(tau) });
        }
        if r >= tau_max {
            return None;
        }
        if is_max {
            if gr >= -GRAZE_TOLERANCE {
                return Some(Hit { tau: r, dg: 0.0 });
            }
            next_max += period;
        } else {
            next_min += period;
        }
        l = r;
        gl = gr;
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    region: Region,
    frame: Frame,
    t_start: f64,
    t_end: f64,
    u0: f64,
    pu: f64,
    v0: f64,
    vd0: f64,
    w: f64,
}

impl Segment {
    fn local(&self, t: f64) -> PhasePoint {
        let tau = t - self.t_start;
        let (s, c) = (self.w * tau).sin_cos();
        PhasePoint::new(
            [self.u0 + self.pu * tau, self.v0 * c + self.vd0 / self.w * s],
            [self.pu, -self.v0 * self.w * s + self.vd0 * c],
        )
    }
}

/// Exact piecewise solution through a sharp waveguide.
#[derive(Debug, Clone)]
pub struct SharpTrajectory {
    segments: Vec<Segment>,
    pub outcome: TrajectoryOutcome,
    /// Regions visited and, per region, the number of local maxima of each
    /// exit-line function before leaving it. Used by the boundary oracle.
    pub(crate) signature: Vec<u32>,
    params: ModelParams,
}

impl SharpTrajectory {
    /// State at time `t` (clamped to the propagated interval).
    pub fn state_at(&self, t: f64) -> ClassicalState {
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.t_end)
            .unwrap_or_else(|| self.segments.last().unwrap());
        let t = t.clamp(seg.t_start, seg.t_end);
        let p = transform_frame(&self.params, seg.local(t), seg.frame, Frame::Initial).unwrap();
        ClassicalState {
            region: seg.region,
            position: p.pos,
            velocity: p.vel,
            time: t,
        }
    }

    pub fn regions(&self) -> Vec<Region> {
        self.segments.iter().map(|s| s.region).collect()
    }
}

fn frame_of(region: Region) -> Frame {
    match region {
        Region::Initial => Frame::Initial,
        Region::Intermediate => Frame::Intermediate,
        Region::Final => Frame::Final,
    }
}

fn frequency(params: &ModelParams, region: Region) -> f64 {
    let (ca, cb) = (params.alpha.cos(), params.beta.cos());
    match region {
        Region::Initial => 1.0,
        Region::Intermediate => ca,
        Region::Final => ca * cb,
    }
}

fn line_value(params: &ModelParams, line: GluingLine, pos: [f64; 2]) -> f64 {
    let c = coords(params, pos[0], pos[1]);
    match line {
        GluingLine::First => c.xp,
        GluingLine::Second => c.xi,
    }
}

/// Exit lines of a region with the sign that makes g < 0 inside.
fn exits(params: &ModelParams, region: Region) -> Vec<(GluingLine, f64)> {
    match (region, params.is_one_turn()) {
        (Region::Initial, true) => vec![(GluingLine::Second, 1.0)],
        (Region::Initial, false) => vec![(GluingLine::First, 1.0), (GluingLine::Second, 1.0)],
        (Region::Intermediate, _) => vec![(GluingLine::First, -1.0), (GluingLine::Second, 1.0)],
        (Region::Final, _) => vec![(GluingLine::Second, -1.0)],
    }
}

fn wave_for(params: &ModelParams, seg: &Segment, line: GluingLine, sign: f64) -> Wave {
    let at = |u: f64, v: f64| {
        let p = transform_frame(params, PhasePoint::new([u, v], [0.0, 0.0]), seg.frame, Frame::Initial).unwrap();
        sign * line_value(params, line, p.pos)
    };
    let k0 = at(0.0, 0.0);
    let ku = at(1.0, 0.0) - k0;
    let kv = at(0.0, 1.0) - k0;
    Wave {
        c: [k0 + ku * seg.u0, ku * seg.pu, kv * seg.vd0 / seg.w, kv * seg.v0],
        w: seg.w,
    }
}

fn region_code(r: Region) -> u32 {
    match r {
        Region::Initial => 1_000_000,
        Region::Intermediate => 2_000_000,
        Region::Final => 3_000_000,
    }
}

/// Propagates a launch through a sharp waveguide and keeps the full
/// piecewise solution.
pub fn trace_sharp(params: &ModelParams, launch: &LaunchSpec, max_time: f64) -> Result<SharpTrajectory> {
    params.validate()?;
    if !params.is_sharp() {
        return Err(Error::NonSharp(params.b));
    }
    launch.validate()?;
    if !(max_time > 0.0) {
        return Err(Error::InvalidInput(format!("max_time = {max_time}")));
    }
    let v_tol = TANGENCY_TOLERANCE * (2.0 * launch.energy).sqrt();
    let mut state = launch.initial_state();
    let mut segments = Vec::new();
    let mut touches = Vec::new();
    let mut signature = Vec::new();

    for _ in 0..16 {
        let frame = frame_of(state.region);
        let local = transform_frame(
            params,
            PhasePoint::new(state.position, state.velocity),
            Frame::Initial,
            frame,
        )?;
        let mut seg = Segment {
            region: state.region,
            frame,
            t_start: state.time,
            t_end: max_time,
            u0: local.pos[0],
            pu: local.vel[0],
            v0: local.pos[1],
            vd0: local.vel[1],
            w: frequency(params, state.region),
        };
        let lines = exits(params, state.region);
        let waves: Vec<Wave> = lines.iter().map(|&(l, s)| wave_for(params, &seg, l, s)).collect();
        let tau_max = max_time - seg.t_start;
        let hit = waves
            .iter()
            .enumerate()
            .filter_map(|(i, w)| first_hit(w, tau_max).map(|h| (i, h)))
            .min_by(|a, b| a.1.tau.total_cmp(&b.1.tau));

        signature.push(region_code(state.region));
        let Some((i, hit)) = hit else {
            seg.t_end = max_time;
            signature.extend(waves.iter().map(|w| w.maxima_before(tau_max)));
            segments.push(seg);
            let end = SharpTrajectory {
                segments: segments.clone(),
                outcome: dummy_outcome(),
                signature: vec![],
                params: *params,
            }
            .state_at(max_time);
            // leaving towards x → −∞ without further crossings is a reflection
            let kind = if state.region == Region::Initial && local.vel[0] < 0.0 {
                OutcomeKind::Reflected
            } else {
                OutcomeKind::Undecided
            };
            return Ok(finish(params, segments, signature, touches, kind, end));
        };
        signature.extend(waves.iter().map(|w| w.maxima_before(hit.tau)));
        seg.t_end = seg.t_start + hit.tau;
        segments.push(seg);
        let p = transform_frame(params, seg.local(seg.t_end), frame, Frame::Initial)?;
        let line = lines[i].0;
        touches.push(TouchEvent {
            time: seg.t_end,
            position: p.pos,
            line,
            normal_velocity: hit.dg,
        });
        let target = match (state.region, line) {
            (_, GluingLine::First) if state.region == Region::Initial => Region::Intermediate,
            (_, GluingLine::First) => Region::Initial,
            (Region::Final, GluingLine::Second) => {
                if params.is_one_turn() || coords(params, p.pos[0], p.pos[1]).xp < 0.0 {
                    Region::Initial
                } else {
                    Region::Intermediate
                }
            }
            (_, GluingLine::Second) => Region::Final,
        };
        let at_touch = ClassicalState {
            region: target,
            position: p.pos,
            velocity: p.vel,
            time: seg.t_end,
        };
        if hit.dg.abs() < v_tol {
            let s = ClassicalState {
                region: state.region,
                ..at_touch
            };
            return Ok(finish(params, segments, signature, touches, OutcomeKind::Reflected, s));
        }
        if target == Region::Final {
            return Ok(finish(
                params,
                segments,
                signature,
                touches,
                OutcomeKind::Transmitted,
                at_touch,
            ));
        }
        state = at_touch;
    }
    let end = SharpTrajectory {
        segments: segments.clone(),
        outcome: dummy_outcome(),
        signature: vec![],
        params: *params,
    }
    .state_at(f64::INFINITY);
    Ok(finish(
        params,
        segments,
        signature,
        touches,
        OutcomeKind::Undecided,
        end,
    ))
}

fn dummy_outcome() -> TrajectoryOutcome {
    TrajectoryOutcome {
        kind: OutcomeKind::Undecided,
        touch_events: vec![],
        final_state: ClassicalState {
            region: Region::Initial,
            position: [0.0; 2],
            velocity: [0.0; 2],
            time: 0.0,
        },
    }
}

fn finish(
    params: &ModelParams,
    segments: Vec<Segment>,
    signature: Vec<u32>,
    touch_events: Vec<TouchEvent>,
    kind: OutcomeKind,
    final_state: ClassicalState,
) -> SharpTrajectory {
    SharpTrajectory {
        segments,
        outcome: TrajectoryOutcome {
            kind,
            touch_events,
            final_state,
        },
        signature,
        params: *params,
    }
}

/// Propagates a launch through a sharp waveguide using the exact solution in
/// each region.
pub fn propagate_sharp(params: &ModelParams, launch: &LaunchSpec, max_time: f64) -> Result<TrajectoryOutcome> {
    trace_sharp(params, launch, max_time).map(|t| t.outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_maxima_match_grid() {
        let w = Wave {
            c: [-1.0, 0.05, 0.3, -0.7],
            w: 1.3,
        };
        let dt = 1e-4;
        let mut count = 0;
        let mut t = dt;
        while t < 40.0 {
            if w.dg(t - dt) > 0.0 && w.dg(t) <= 0.0 {
                count += 1;
            }
            t += dt;
        }
        assert_eq!(w.maxima_before(40.0), count);
    }

    #[test]
    fn first_hit_finds_earliest_crossing() {
        let w = Wave {
            c: [-1.0, 0.02, 0.0, 0.5],
            w: 1.0,
        };
        let h = first_hit(&w, 1e3).unwrap();
        assert!(w.g(h.tau).abs() < 1e-12);
        let mut t = 0.0;
        while t < h.tau - 1e-6 {
            assert!(w.g(t) < 0.0);
            t += 1e-3;
        }
    }

    #[test]
    fn monotone_wave_without_crossing() {
        let w = Wave {
            c: [-1.0, -0.5, 0.1, 0.0],
            w: 1.0,
        };
        assert!(first_hit(&w, 100.0).is_none());
    }

    #[test]
    fn rejects_smooth_model() {
        let p = ModelParams::one_turn(0.5).with_b(0.01);
        let l = LaunchSpec::new(1e-3, 1e-4, 0.0);
        assert!(matches!(propagate_sharp(&p, &l, 1e3), Err(Error::NonSharp(_))));
    }

    #[test]
    fn ground_state_passes_one_turn() {
        let p = ModelParams::one_turn(std::f64::consts::PI / 3.0);
        let l = LaunchSpec::new(1e-3, 0.0, 0.0);
        let out = propagate_sharp(&p, &l, 1e4).unwrap();
        assert_eq!(out.kind, OutcomeKind::Transmitted);
        assert_eq!(out.touch_events.len(), 1);
        assert!(out.touch_events[0].position[0].abs() < 1e-12);
    }
}
