//! Small dense symmetric kernels: Cholesky and cyclic Jacobi eigenvalues.
//! Only used at desk scale (Schur complements, inf-sup probes).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Lower Cholesky factor; fails unless symmetric positive definite.
    pub fn cholesky(&self) -> Result<DenseCholesky> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        let scale = (0..n).fold(0.0f64, |m, i| m.max(libm::fabs(self.get(i, i))));
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= scale * f64::EPSILON * n as f64 || !s.is_finite() {
                        return Err(Error::Singular { row: i });
                    }
                    l[i * n + i] = libm::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { dim: n, l })
    }

    /// Eigenvalues of a symmetric matrix, ascending.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut a = self.data.clone();
        let off = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[i * n + j] * a[i * n + j];
                    }
                }
            }
            s
        };
        let total: f64 = a.iter().map(|v| v * v).sum();
        let mut converged = n < 2;
        for _sweep in 0..100 {
            if converged || off(&a) <= total * 1e-30 {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        if !converged && off(&a) > total * 1e-24 {
            return Err(Error::Eigen);
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        if ev.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen);
        }
        ev.sort_by(|x, y| x.total_cmp(y));
        Ok(ev)
    }
}

#[derive(Debug, Clone)]
pub struct DenseCholesky {
    dim: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let y = self.forward(rhs);
        self.backward(&y)
    }

    /// `L^{-1} b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// `L^{-T} b`.
    pub fn backward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// `L^{-1} M L^{-T}` for symmetric `M`.
    pub fn congruence(&self, m: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        // columns of L^{-1} M
        let mut tmp = DenseMatrix::zeros(n);
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| m.get(i, j)).collect();
            let y = self.forward(&col);
            for i in 0..n {
                tmp.set(i, j, y[i]);
            }
        }
        // (L^{-1} (L^{-1} M)^T)^T = L^{-1} M L^{-T}
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            let row: Vec<f64> = (0..n).map(|j| tmp.get(i, j)).collect();
            let y = self.forward(&row);
            for j in 0..n {
                out.set(i, j, y[j]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_laplacian() {
        let n = 6;
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
                m.set(i + 1, i, -1.0);
            }
        }
        let ev = m.symmetric_eigenvalues().unwrap();
        for (k, v) in ev.iter().enumerate() {
            let theta = (k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        }
    }

    #[test]
    fn cholesky_solve_and_congruence() {
        let m = DenseMatrix::from_row_major(3, vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0])
            .unwrap();
        let ch = m.cholesky().unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let back = m.matvec(&x);
        for (a, b) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        // L^{-1} M L^{-T} = I when M is the factored matrix
        let id = ch.congruence(&m);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let m = DenseMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(m.cholesky().is_err());
    }
}
