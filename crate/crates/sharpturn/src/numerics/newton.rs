use num_complex::Complex64;

use super::linalg::{Lu, Scalar};
use super::RootConfig;
use crate::{Error, Result};

const CONDITION_LIMIT: f64 = 1e12;

/// Outcome of a Newton solve together with the iterate history.
#[derive(Debug, Clone)]
pub struct NewtonReport<T> {
    pub root: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<Vec<T>>,
}

fn max_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter()
        .map(|x| x.abs())
        .fold(0.0, |m, a| if a.is_nan() { f64::NAN } else { m.max(a) })
}

fn jacobian<T, F>(f: &F, x: &[T], step: f64) -> Vec<T>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    let n = x.len();
    let mut jac = vec![T::zero(); n * n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        let orig = xp[j];
        xp[j] = orig + T::from_f64(h);
        let fp = f(&xp);
        xp[j] = orig - T::from_f64(h);
        let fm = f(&xp);
        xp[j] = orig;
        for i in 0..n {
            jac[i * n + j] = (fp[i] - fm[i]) / T::from_f64(2.0 * h);
        }
    }
    jac
}

fn newton<T, F>(f: F, seed: &[T], cfg: &RootConfig) -> Result<NewtonReport<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    cfg.validate()?;
    let n = seed.len();
    let mut x = seed.to_vec();
    let mut r = f(&x);
    if r.len() != n {
        return Err(Error::InvalidInput(format!(
            "residual maps dimension {n} to {}",
            r.len()
        )));
    }
    let mut rn = max_norm(&r);
    let mut history = vec![x.clone()];
    for it in 0..cfg.max_iterations {
        if rn <= cfg.residual_tolerance {
            return Ok(NewtonReport {
                root: x,
                iterations: it,
                residual: rn,
                history,
            });
        }
        if !rn.is_finite() {
            break;
        }
        let jac = jacobian(&f, &x, cfg.jacobian_step);
        let lu = Lu::new(n, jac.clone()).ok_or(Error::SingularJacobian {
            condition: f64::INFINITY,
        })?;
        let cond = lu.condition(&jac);
        if !(cond <= CONDITION_LIMIT) {
            return Err(Error::SingularJacobian { condition: cond });
        }
        let neg: Vec<T> = r.iter().map(|&v| -v).collect();
        let dx = lu.solve(&neg);

        // Halve the step until the residual drops; fall back to the full
        // step when nothing helps so the iteration can still escape.
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let xt: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + d * T::from_f64(lam)).collect();
            let rt = f(&xt);
            let nt = max_norm(&rt);
            if nt < rn {
                accepted = Some((xt, rt, nt));
                break;
            }
            lam *= 0.5;
        }
        let (xt, rt, nt) = accepted.unwrap_or_else(|| {
            let xt: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + d).collect();
            let rt = f(&xt);
            let nt = max_norm(&rt);
            (xt, rt, nt)
        });
        x = xt;
        r = rt;
        rn = nt;
        history.push(x.clone());
    }
    if rn <= cfg.residual_tolerance {
        let iterations = history.len() - 1;
        return Ok(NewtonReport {
            root: x,
            iterations,
            residual: rn,
            history,
        });
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual: rn,
    })
}

/// Solves `residual(z) = 0` for a complex vector by Newton's method with a
/// central finite-difference Jacobian.
pub fn complex_newton<F>(residual: F, seed: &[Complex64], cfg: &RootConfig) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    newton(residual, seed, cfg).map(|r| r.root)
}

/// Same as [`complex_newton`] but keeps every iterate.
pub fn complex_newton_report<F>(residual: F, seed: &[Complex64], cfg: &RootConfig) -> Result<NewtonReport<Complex64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    newton(residual, seed, cfg)
}

/// Real-valued counterpart of [`complex_newton`].
pub fn real_newton<F>(residual: F, seed: &[f64], cfg: &RootConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    newton(residual, seed, cfg).map(|r| r.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_plus_one() {
        let z = complex_newton(|z| vec![z[0] * z[0] + 1.0], &[c(0.0, 0.5)], &RootConfig::default()).unwrap();
        assert!((z[0] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn linear() {
        let z = complex_newton(|z| vec![z[0] - 1.0], &[c(10.0, 0.0)], &RootConfig::default()).unwrap();
        assert!((z[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn one_turn_matching_relation() {
        let cb = (std::f64::consts::PI / 3.0).cos();
        let z = complex_newton(
            |z| vec![(z[0] * cb).sin() + c(0.0, 0.57735)],
            &[c(0.0, -1.0)],
            &RootConfig::default(),
        )
        .unwrap();
        assert!(z[0].re.abs() < 1e-10);
        assert!((z[0].im + 1.0986123).abs() < 1e-6, "{}", z[0]);
    }

    #[test]
    fn singular_system_is_reported() {
        let err = complex_newton(
            |z| vec![z[0] + z[1], z[0] + z[1] - 1.0],
            &[c(0.0, 0.0), c(0.0, 0.0)],
            &RootConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularJacobian { .. }));
    }

    #[test]
    fn no_root_reports_nonconvergence() {
        let cfg = RootConfig {
            max_iterations: 20,
            ..RootConfig::default()
        };
        let err = real_newton(|x| vec![x[0] * x[0] + 1.0], &[0.3], &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::NonConvergence { .. } | Error::SingularJacobian { .. }
        ));
    }

    #[test]
    fn quadratic_convergence() {
        let rep = complex_newton_report(|z| vec![z[0] * z[0] + 1.0], &[c(0.0, 0.5)], &RootConfig::default()).unwrap();
        let errs: Vec<f64> = rep.history.iter().map(|z| (z[0] - c(0.0, 1.0)).norm()).collect();
        let usable: Vec<f64> = errs.into_iter().filter(|&e| e > 1e-13).collect();
        let k = usable.len();
        assert!(k >= 4);
        for w in usable[k - 4..].windows(2) {
            assert!(w[1] / (w[0] * w[0]) < 2.0, "{:?}", w);
        }
    }

    #[test]
    fn two_dimensional_real() {
        let x = real_newton(
            |x| vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]],
            &[1.0, 2.0],
            &RootConfig::default(),
        )
        .unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-12 && (x[1] - 2f64.sqrt()).abs() < 1e-12);
    }
}
