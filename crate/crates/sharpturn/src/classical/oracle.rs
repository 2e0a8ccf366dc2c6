use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sharp::trace_sharp;
use super::{LaunchSpec, OutcomeKind, DEFAULT_MAX_TIME};
use crate::geometry::ModelParams;
use crate::{Error, Result};

/// How launch phases are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseSampling {
    Uniform,
    /// Sorted uniform random phases from a ChaCha8 stream.
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub energy: f64,
    pub n_cr: f64,
    pub phase_samples: usize,
}

/// Number of coarse N levels probed before bisection.
const COARSE_LEVELS: usize = 24;

fn phases(sampling: PhaseSampling, n: usize) -> Vec<f64> {
    match sampling {
        PhaseSampling::Uniform => (0..n).map(|i| TAU * i as f64 / n as f64).collect(),
        PhaseSampling::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
    }
}

fn horizon(launch: &LaunchSpec) -> f64 {
    DEFAULT_MAX_TIME.max(20.0 * launch.start_x.abs() / launch.momentum())
}

/// Whether some launch phase at (E, N) reaches a gluing line tangentially.
///
/// Adjacent phases whose trajectories differ in the number of local maxima
/// of a line function are bisected to machine precision; the pair is a
/// reflection when the limiting trajectory touches the line.
pub fn reflection_exists(params: &ModelParams, energy: f64, excitation: f64, phases: &[f64]) -> Result<bool> {
    if phases.len() < 2 {
        return Err(Error::InvalidInput("need at least two phases".into()));
    }
    let launch = |phi: f64| LaunchSpec::new(energy, excitation, phi);
    let t_max = horizon(&launch(0.0));
    let traces: Vec<_> = phases
        .par_iter()
        .map(|&phi| trace_sharp(params, &launch(phi), t_max))
        .collect::<Result<_>>()?;
    if traces.iter().any(|t| t.outcome.kind == OutcomeKind::Reflected) {
        return Ok(true);
    }
    let n = phases.len();
    let found = (0..n).into_par_iter().try_fold(
        || false,
        |acc, i| -> Result<bool> {
            if acc {
                return Ok(true);
            }
            let j = (i + 1) % n;
            if traces[i].signature == traces[j].signature {
                return Ok(false);
            }
            let (mut lo, mut hi) = (phases[i], if j == 0 { phases[0] + TAU } else { phases[j] });
            let left = &traces[i].signature;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let t = trace_sharp(params, &launch(mid), t_max)?;
                if t.outcome.kind == OutcomeKind::Reflected {
                    return Ok(true);
                }
                if &t.signature == left {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(false)
        },
    );
    let results: Vec<bool> = found.collect::<Result<_>>()?;
    Ok(results.into_iter().any(|b| b))
}

/// Lowest excitation admitting a reflection at the given energy, found by a
/// coarse scan in N followed by bisection down to `n_tolerance`.
pub fn oracle_boundary(
    params: &ModelParams,
    energy: f64,
    phase_samples: usize,
    n_tolerance: f64,
) -> Result<OracleResult> {
    oracle_boundary_with(params, energy, phase_samples, n_tolerance, PhaseSampling::Uniform)
}

pub fn oracle_boundary_with(
    params: &ModelParams,
    energy: f64,
    phase_samples: usize,
    n_tolerance: f64,
    sampling: PhaseSampling,
) -> Result<OracleResult> {
    params.validate()?;
    if !(energy > 0.0 && n_tolerance > 0.0 && phase_samples >= 2) {
        return Err(Error::InvalidInput(format!(
            "oracle needs E > 0, tolerance > 0 and two phases (E = {energy}, tol = {n_tolerance}, samples = {phase_samples})"
        )));
    }
    let ph = phases(sampling, phase_samples);
    let top = energy * (1.0 - 1e-4);
    let levels: Vec<f64> = (1..=COARSE_LEVELS)
        .map(|k| top * k as f64 / COARSE_LEVELS as f64)
        .collect();
    let mut lo = 0.0;
    let mut hi = None;
    for &n in &levels {
        if reflection_exists(params, energy, n, &ph)? {
            hi = Some(n);
            break;
        }
        lo = n;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NoReflectionFound { energy });
    };
    while hi - lo > n_tolerance {
        let mid = 0.5 * (lo + hi);
        if reflection_exists(params, energy, mid, &ph)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(OracleResult {
        energy,
        n_cr: hi,
        phase_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_phases_are_sorted_and_reproducible() {
        let a = phases(PhaseSampling::Random { seed: 7 }, 50);
        let b = phases(PhaseSampling::Random { seed: 7 }, 50);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|&p| (0.0..TAU).contains(&p)));
    }

    #[test]
    fn rejects_bad_input() {
        let p = ModelParams::one_turn(0.5);
        assert!(oracle_boundary(&p, -1.0, 10, 1e-6).is_err());
        assert!(oracle_boundary(&p, 1e-3, 1, 1e-6).is_err());
    }
}
