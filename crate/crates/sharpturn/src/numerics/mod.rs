//! Numerical kernels shared by the physics modules.

mod bracket;
mod continuation;
mod linalg;
mod newton;
mod ode;

pub use bracket::{bracket_root, golden_max};
pub use continuation::{check_monotone, continuation_scan, ScanLost};
pub use newton::{complex_newton, complex_newton_report, real_newton, NewtonReport};
pub use ode::{integrate_ode, Event, EventRecord, OdeConfig, OdeSolution};

/// Tolerances for the root finders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    pub jacobian_step: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            residual_tolerance: 1e-12,
            max_iterations: 100,
            jacobian_step: 1e-7,
        }
    }
}

impl RootConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        RootConfig {
            residual_tolerance: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.residual_tolerance > 0.0) || self.max_iterations < 1 || !(self.jacobian_step > 0.0) {
            return Err(crate::Error::InvalidInput(format!("bad RootConfig {self:?}")));
        }
        Ok(())
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
