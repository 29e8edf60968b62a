//! Small dense complex linear algebra: row-major matrix, LU with partial
//! pivoting, and triangular solves. Sized for the N^d <= 4096 oracle guard.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<Complex64>, // row-major
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            a: vec![Complex64::default(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.a
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (row, yi) in self.a.chunks_exact(self.n).zip(y.iter_mut()) {
            let mut acc = Complex64::default();
            for (aij, xj) in row.iter().zip(x) {
                acc += aij * xj;
            }
            *yi = acc;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Factor in place with partial pivoting. Fails on a pivot that is zero
    /// relative to the largest matrix entry.
    pub fn lu_factor(mut self) -> Result<LuFactors> {
        let n = self.n;
        let amax = self.max_abs();
        if amax == 0.0 {
            return Err(Error::Singular("matrix is identically zero".into()));
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            // pivot search in column k
            let mut best = k;
            let mut best_abs = self.a[k * n + k].norm_sqr();
            for i in k + 1..n {
                let v = self.a[i * n + k].norm_sqr();
                if v > best_abs {
                    best_abs = v;
                    best = i;
                }
            }
            piv[k] = best;
            if best != k {
                for j in 0..n {
                    self.a.swap(k * n + j, best * n + j);
                }
            }
            let pivot = self.a[k * n + k];
            if pivot.norm() <= 1e-13 * amax {
                return Err(Error::Singular(format!(
                    "pivot {:.3e} at step {k} below tolerance (scale {amax:.3e})",
                    pivot.norm()
                )));
            }
            let pinv = 1.0 / pivot;
            let (upper, lower) = self.a.split_at_mut((k + 1) * n);
            let row_k = &upper[k * n + k + 1..k * n + n];
            for chunk in lower.chunks_exact_mut(n) {
                let m = chunk[k] * pinv;
                chunk[k] = m;
                let tail = &mut chunk[k + 1..n];
                for (t, rk) in tail.iter_mut().zip(row_k) {
                    *t -= m * rk;
                }
            }
        }
        Ok(LuFactors {
            n,
            lu: self.a,
            piv,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl LuFactors {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // forward: L has unit diagonal
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut acc = x[i];
            for (l, xk) in row.iter().zip(x.iter()) {
                acc -= l * xk;
            }
            x[i] = acc;
        }
        // backward
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let mut acc = x[i];
            for (u, xk) in row.iter().zip(x[i + 1..].iter()) {
                acc -= u * xk;
            }
            x[i] = acc / self.lu[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_solves_random_system() {
        let n = 40;
        let mut state = 0xdeadbeefu64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, c(rng(), rng()));
            }
            let d = m.get(i, i);
            m.set(i, i, d + c(3.0, 0.0)); // diagonally dominant-ish
        }
        let xstar: Vec<Complex64> = (0..n).map(|_| c(rng(), rng())).collect();
        let mut b = vec![Complex64::default(); n];
        m.matvec(&xstar, &mut b);
        let lu = m.clone().lu_factor().unwrap();
        let x = lu.solve(&b);
        let mut r = vec![Complex64::default(); n];
        m.matvec(&x, &mut r);
        let res: f64 = r.iter().zip(&b).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-12 * bn);
        let err: f64 = x.iter().zip(&xstar).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut m = DenseMatrix::zeros(3);
        m.set(0, 0, c(1.0, 0.0));
        m.set(1, 1, c(1.0, 0.0));
        // row 2 equals row 0
        m.set(2, 0, c(1.0, 0.0));
        let err = m.lu_factor();
        assert!(matches!(err, Err(Error::Singular(_))));
    }

    #[test]
    fn identity_round_trip() {
        let lu = DenseMatrix::identity(5).lu_factor().unwrap();
        let b: Vec<Complex64> = (0..5).map(|i| c(i as f64, -(i as f64))).collect();
        assert_eq!(lu.solve(&b), b);
    }
}
