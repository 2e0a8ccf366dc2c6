use crate::{Error, Result};

/// A branch that stopped before the end of its grid.
#[derive(Debug, Clone)]
pub struct ScanLost<S> {
    /// Grid value at which the solver gave up.
    pub parameter: f64,
    /// Points solved before the loss, in grid order.
    pub points: Vec<(f64, S)>,
}

impl<S> From<ScanLost<S>> for Error {
    fn from(l: ScanLost<S>) -> Self {
        Error::BranchLost { parameter: l.parameter }
    }
}

/// Walks `grid`, seeding each solve with the previous solution.
///
/// When a step fails, the solver is retried once at the midpoint of the
/// step; if that also fails (or the step after it does), the scan stops and
/// reports the partial branch.
pub fn continuation_scan<S, F>(
    mut solver: F,
    grid: &[f64],
    initial_seed: S,
) -> std::result::Result<Vec<(f64, S)>, ScanLost<S>>
where
    S: Clone,
    F: FnMut(f64, &S) -> Result<S>,
{
    let mut out: Vec<(f64, S)> = Vec::with_capacity(grid.len());
    let mut seed = initial_seed;
    let mut prev: Option<f64> = None;
    for &p in grid {
        let solved = match solver(p, &seed) {
            Ok(s) => Some(s),
            Err(_) => prev.and_then(|q| {
                let mid = 0.5 * (p + q);
                solver(mid, &seed).ok().and_then(|m| solver(p, &m).ok())
            }),
        };
        match solved {
            Some(s) => {
                seed = s.clone();
                out.push((p, s));
                prev = Some(p);
            }
            None => {
                return Err(ScanLost {
                    parameter: p,
                    points: out,
                })
            }
        }
    }
    Ok(out)
}

/// Checks that a grid is strictly monotone.
pub fn check_monotone(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let inc = grid.windows(2).all(|w| w[1] > w[0]);
    let dec = grid.windows(2).all(|w| w[1] < w[0]);
    if inc || dec {
        Ok(())
    } else {
        Err(Error::InvalidInput("grid is not monotone".into()))
    }
}
