//! Real classical dynamics: exact piecewise propagation through sharp
//! turns, the brute-force boundary oracle, and ODE propagation through
//! smoothened turns.

mod oracle;
mod sharp;
mod smooth;

use serde::Serialize;

pub use oracle::{oracle_boundary, oracle_boundary_with, reflection_exists, OracleResult, PhaseSampling};
pub use sharp::{propagate_sharp, trace_sharp, SharpTrajectory};
pub use smooth::{propagate_smooth, SmoothRun, TOUCH_BAND};

use crate::{Error, Result};

/// Default integration horizon in rescaled time units.
pub const DEFAULT_MAX_TIME: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// before the first turn (x′ < 0, ξ < 0)
    Initial,
    /// between the turns (x′ > 0, ξ < 0)
    Intermediate,
    /// past the last turn (ξ > 0)
    Final,
}

/// The two gluing lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GluingLine {
    /// x′ = 0
    First,
    /// ξ = 0
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalState {
    pub region: Region,
    /// (x, y) in the initial frame
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TouchEvent {
    pub time: f64,
    pub position: [f64; 2],
    pub line: GluingLine,
    /// velocity component along the line normal, pointing out of the region
    /// the particle came from
    pub normal_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutcomeKind {
    Reflected,
    Transmitted,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryOutcome {
    pub kind: OutcomeKind,
    pub touch_events: Vec<TouchEvent>,
    pub final_state: ClassicalState,
}

/// Incoming asymptotic state: x = start_x + p₀t, y = √(2N)·sin(t + φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaunchSpec {
    pub energy: f64,
    pub excitation: f64,
    pub phase: f64,
    pub start_x: f64,
}

impl LaunchSpec {
    pub fn new(energy: f64, excitation: f64, phase: f64) -> Self {
        LaunchSpec {
            energy,
            excitation,
            phase,
            start_x: -5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.energy > 0.0 && self.excitation >= 0.0 && self.excitation <= self.energy && self.start_x <= -5.0) {
            return Err(Error::InvalidInput(format!("invalid launch {self:?}")));
        }
        Ok(())
    }

    pub fn momentum(&self) -> f64 {
        (2.0 * (self.energy - self.excitation)).sqrt()
    }

    pub fn initial_state(&self) -> ClassicalState {
        let amp = (2.0 * self.excitation).sqrt();
        ClassicalState {
            region: Region::Initial,
            position: [self.start_x, amp * self.phase.sin()],
            velocity: [self.momentum(), amp * self.phase.cos()],
            time: 0.0,
        }
    }
}
