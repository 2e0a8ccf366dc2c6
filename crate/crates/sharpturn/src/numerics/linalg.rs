use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar field the dense solver works over.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn abs(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// LU factorisation with partial pivoting of a row-major n×n matrix.
pub struct Lu<T> {
    n: usize,
    a: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Returns `None` when a pivot is exactly zero.
    pub fn new(n: usize, mut a: Vec<T>) -> Option<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            if a[p * n + k].abs() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            for i in k + 1..n {
                let m = a[i * n + k] / a[k * n + k];
                a[i * n + k] = m;
                for j in k + 1..n {
                    let v = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - m * v;
                }
            }
        }
        Some(Lu { n, a, piv })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.a[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.a[i * n + j] * x[j];
            }
            x[i] = x[i] / self.a[i * n + i];
        }
        x
    }

    /// 1-norm condition number of the original matrix, computed through the
    /// explicit inverse (the systems here are tiny).
    pub fn condition(&self, original: &[T]) -> f64 {
        let n = self.n;
        let norm1 =
            |m: &dyn Fn(usize, usize) -> f64| (0..n).map(|j| (0..n).map(|i| m(i, j)).sum::<f64>()).fold(0.0, f64::max);
        let mut inv = vec![T::zero(); n * n];
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        norm1(&|i, j| original[i * n + j].abs()) * norm1(&|i, j| inv[i * n + j].abs())
    }
}
