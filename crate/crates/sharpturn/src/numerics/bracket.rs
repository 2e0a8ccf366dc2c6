use super::RootConfig;
use crate::{Error, Result};

/// Finds a root of `f` inside `[lo, hi]` by bisection accelerated with
/// secant steps.
///
/// A secant step is taken only while it keeps shrinking the bracket by at
/// least half per iteration; otherwise the interval is bisected.
pub fn bracket_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64> {
    cfg.validate()?;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::NoSignChange {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    let tol = cfg.residual_tolerance;
    let mut use_secant = true;
    for _ in 0..cfg.max_iterations.max(200) {
        let width = b - a;
        let mut x = 0.5 * (a + b);
        if use_secant {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                x = s;
            }
        }
        let fx = f(x);
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        if b - a <= tol || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        use_secant = b - a <= 0.5 * width;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual: fa.abs().min(fb.abs()),
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let x = bracket_root(|x| x * x - 2.0, 1.0, 2.0, &RootConfig::default()).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn half_pi() {
        let x = bracket_root(f64::cos, 1.0, 2.0, &RootConfig::default()).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn reduced_left_side() {
        // Oracle: a plain scan of (1+x)e^{-x} on a fine grid.
        let target = 0.5;
        let g = |x: f64| (1.0 + x) * (-x).exp() - target;
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=400_000 {
            let x = 4.0 * i as f64 / 400_000.0;
            if g(x).abs() < best.1 {
                best = (x, g(x).abs());
            }
        }
        let x = bracket_root(g, 0.0, 4.0, &RootConfig::default()).unwrap();
        assert!((x - best.0).abs() < 2e-5);
        assert!((x - 1.67835).abs() < 1e-5);
    }

    #[test]
    fn no_sign_change() {
        let e = bracket_root(|x| x * x + 1.0, -1.0, 1.0, &RootConfig::default()).unwrap_err();
        assert!(matches!(e, Error::NoSignChange { .. }));
    }

    #[test]
    fn golden() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7 && (fx - 2.0).abs() < 1e-12);
    }
}
