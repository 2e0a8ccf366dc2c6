use super::{ClassicalState, GluingLine, LaunchSpec, OutcomeKind, Region, TouchEvent, TrajectoryOutcome};
use crate::geometry::{coords, waveguide_with_gradient, ModelParams};
use crate::numerics::{integrate_ode, Event, OdeConfig, OdeSolution};
use crate::{Error, Result};

/// Local maxima of a line coordinate count as touches only inside this band.
pub const TOUCH_BAND: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct SmoothRun {
    pub outcome: TrajectoryOutcome,
    pub solution: OdeSolution,
    /// Largest relative energy error over the stored steps.
    pub energy_drift: f64,
}

fn energy(params: &ModelParams, s: &[f64]) -> f64 {
    let w = waveguide_with_gradient(params, s[0], s[1]).0;
    0.5 * (s[2] * s[2] + s[3] * s[3] + w * w)
}

fn region_of(params: &ModelParams, s: &[f64]) -> Region {
    let c = coords(params, s[0], s[1]);
    if c.xi > 0.0 {
        Region::Final
    } else if !params.is_one_turn() && c.xp > 0.0 {
        Region::Intermediate
    } else {
        Region::Initial
    }
}

/// Integrates the equations of motion through a smoothened waveguide.
///
/// The run stops once the particle is back at `start_x` moving away
/// (reflected) or a distance |start_x| past the last turn (transmitted).
/// Local maxima of ξ and x′ inside `TOUCH_BAND` are reported as touches.
pub fn propagate_smooth(params: &ModelParams, launch: &LaunchSpec, max_time: f64) -> Result<SmoothRun> {
    params.validate()?;
    if params.is_sharp() {
        return Err(Error::SharpModel);
    }
    launch.validate()?;
    let p = *params;
    let (sa, ca) = p.alpha.sin_cos();
    let (sd, cd) = (p.beta - p.alpha).sin_cos();
    let field = |_: f64, s: &[f64], d: &mut [f64]| {
        let (w, g) = waveguide_with_gradient(&p, s[0], s[1]);
        d[0] = s[2];
        d[1] = s[3];
        d[2] = -w * g[0];
        d[3] = -w * g[1];
    };
    let start = launch.start_x;
    let xi_dot = move |s: &[f64]| cd * s[2] - sd * s[3];
    let xp_dot = move |s: &[f64]| ca * s[2] + sa * s[3];
    let mut events = vec![
        Event::new(move |_, s: &[f64]| s[0] - start).direction(-1).terminal(),
        Event::new(move |_, s: &[f64]| coords(&p, s[0], s[1]).xi + start)
            .direction(1)
            .terminal(),
        Event::new(move |_, s: &[f64]| xi_dot(s)).direction(-1),
    ];
    if !p.is_one_turn() {
        events.push(Event::new(move |_, s: &[f64]| xp_dot(s)).direction(-1));
    }
    let s0 = launch.initial_state();
    let y0 = [s0.position[0], s0.position[1], s0.velocity[0], s0.velocity[1]];
    let cfg = OdeConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-13,
        ..OdeConfig::default()
    };
    let sol = integrate_ode(field, &y0, (0.0, max_time), &events, &cfg)?;

    let e0 = energy(&p, &y0);
    let energy_drift = sol
        .y
        .iter()
        .map(|s| (energy(&p, s) - e0).abs() / e0)
        .fold(0.0, f64::max);
    let touch_events = sol
        .events
        .iter()
        .filter_map(|ev| {
            let c = coords(&p, ev.y[0], ev.y[1]);
            let (line, dist) = match ev.index {
                2 => (GluingLine::Second, c.xi),
                3 => (GluingLine::First, c.xp),
                _ => return None,
            };
            (dist.abs() < TOUCH_BAND).then_some(TouchEvent {
                time: ev.t,
                position: [ev.y[0], ev.y[1]],
                line,
                normal_velocity: 0.0,
            })
        })
        .collect();
    let kind = match sol.terminated_by {
        Some(0) => OutcomeKind::Reflected,
        Some(1) => OutcomeKind::Transmitted,
        _ => OutcomeKind::Undecided,
    };
    let (t, s) = sol.final_state();
    let final_state = ClassicalState {
        region: region_of(&p, s),
        position: [s[0], s[1]],
        velocity: [s[2], s[3]],
        time: t,
    };
    Ok(SmoothRun {
        outcome: TrajectoryOutcome {
            kind,
            touch_events,
            final_state,
        },
        solution: sol,
        energy_drift,
    })
}
