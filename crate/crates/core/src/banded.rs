//! Square band matrices with LU (partial pivoting) and Cholesky factorizations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square matrix whose entries vanish outside `lower` sub- and `upper`
/// super-diagonals. Row `i` stores columns `i - lower ..= i + upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, lower: usize, upper: usize) -> Self {
        Self {
            dim,
            lower,
            upper,
            data: vec![0.0; dim * (lower + upper + 1)],
        }
    }

    /// Constant-coefficient tridiagonal matrix.
    pub fn tridiagonal(dim: usize, sub: f64, diag: f64, sup: f64) -> Self {
        let mut m = Self::zeros(dim, 1, 1);
        for i in 0..dim {
            m.set(i, i, diag);
            if i > 0 {
                m.set(i, i - 1, sub);
            }
            if i + 1 < dim {
                m.set(i, i + 1, sup);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lower(&self) -> usize {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> usize {
        self.upper
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.dim && j < self.dim && j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.offset(i, j);
        self.data[k] += v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    pub fn row_span(&self, i: usize) -> core::ops::RangeInclusive<usize> {
        i.saturating_sub(self.lower)..=(i + self.upper).min(self.dim - 1)
    }

    /// `alpha * self + beta * other`, on the union of both bands.
    pub fn combine(&self, alpha: f64, other: &BandedMatrix, beta: f64) -> Result<BandedMatrix> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = Self::zeros(
            self.dim,
            self.lower.max(other.lower),
            self.upper.max(other.upper),
        );
        for i in 0..self.dim {
            for j in out.row_span(i) {
                let v = alpha * self.get(i, j) + beta * other.get(i, j);
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> BandedMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut out = Self::zeros(self.dim, self.upper, self.lower);
        for i in 0..self.dim {
            for j in self.row_span(i) {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row_span(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for j in self.row_span(i) {
                out[i * self.dim + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            self.row_span(i)
                .all(|j| libm::fabs(self.get(i, j) - self.get(j, i)) <= tol)
        })
    }

    /// LU factorization with partial pivoting, in the layout of LAPACK `gbtrf`.
    pub fn lu(&self) -> Result<BandedLu> {
        let n = self.dim;
        let kl = self.lower;
        let ku = kl + self.upper;
        let w = 2 * kl + self.upper + 1;
        let mut a = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for i in 0..n {
            for j in self.row_span(i) {
                a[idx(i, j)] = self.get(i, j);
            }
        }
        let threshold = self.max_abs() * f64::EPSILON * n.max(1) as f64;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            let mut best = libm::fabs(a[idx(k, k)]);
            for i in k + 1..=last_row {
                let v = libm::fabs(a[idx(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= threshold || !best.is_finite() {
                return Err(Error::Singular { row: k });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    a.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = a[idx(k, k)];
            for i in k + 1..=last_row {
                let l = a[idx(i, k)] / pivot;
                a[idx(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        a[idx(i, j)] -= l * a[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            dim: n,
            lower: kl,
            upper: ku,
            width: w,
            data: a,
            piv,
        })
    }

    /// Band Cholesky `A = L L^T` for symmetric positive definite matrices.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        if self.lower != self.upper {
            return Err(Error::Precondition("cholesky needs a symmetric band"));
        }
        let n = self.dim;
        let p = self.lower;
        let w = p + 1;
        // row i holds L[i, i-p ..= i]
        let mut l = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + p - i);
        for i in 0..n {
            let j0 = i.saturating_sub(p);
            for j in j0..=i {
                let mut s = self.get(i, j);
                let k0 = j0.max(j.saturating_sub(p));
                for k in k0..j {
                    s -= l[idx(i, k)] * l[idx(j, k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Singular { row: i });
                    }
                    l[idx(i, i)] = libm::sqrt(s);
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Ok(BandedCholesky {
            dim: n,
            band: p,
            data: l,
        })
    }
}

/// Packed band LU factors and row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + (j + self.lower - i)]
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.lower).min(n - 1) {
                    b[i] -= self.at(i, k) * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.upper).min(n - 1) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
        b
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    dim: usize,
    band: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.band + 1) + (j + self.band - i)]
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(self.band)..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..=(i + self.band).min(n - 1) {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
            .collect()
    }

    #[test]
    fn storage_and_band() {
        let mut m = BandedMatrix::zeros(4, 1, 2);
        m.set(0, 2, 3.0);
        m.set(3, 2, -1.0);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(3, 2), -1.0);
        assert_eq!(m.get(3, 0), 0.0);
        assert!(!m.in_band(0, 3));
        assert!(!m.in_band(2, 0));
    }

    #[test]
    #[should_panic]
    fn set_outside_band_panics() {
        let mut m = BandedMatrix::zeros(4, 1, 1);
        m.set(0, 2, 1.0);
    }

    #[test]
    fn lu_solves_nonsymmetric_with_pivoting() {
        // zero leading diagonal forces a row interchange
        let m = BandedMatrix::tridiagonal(6, -0.5, 0.0, 0.5);
        let x_true: Vec<f64> = (0..6).map(|i| (i as f64 + 1.0).sqrt()).collect();
        let b = m.matvec(&x_true);
        let x = m.lu().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_detects_singular_skew_matrix() {
        // odd-dimensional skew-symmetric matrices are singular
        let m = BandedMatrix::tridiagonal(5, -0.5, 0.0, 0.5);
        assert!(matches!(m.lu(), Err(Error::Singular { .. })));
    }

    #[test]
    fn wide_band_lu_matches_dense_product() {
        let n = 9;
        let mut m = BandedMatrix::zeros(n, 3, 2);
        for i in 0..n {
            for j in m.row_span(i) {
                let v = ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 0.1 } else { 0.0 };
                m.set(i, j, v);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let b = dense_mul(&m.to_dense(), n, &x_true);
        let x = m.lu().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-11, "{a} vs {e}");
        }
    }

    #[test]
    fn cholesky_round_trip() {
        let m = BandedMatrix::tridiagonal(7, -1.0, 2.0, -1.0);
        let x_true = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 2.0];
        let b = m.matvec(&x_true);
        let x = m.cholesky().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-13);
        }
        let indefinite = BandedMatrix::tridiagonal(3, -2.0, 1.0, -2.0);
        assert!(indefinite.cholesky().is_err());
    }

    #[test]
    fn combine_and_transpose() {
        let s = BandedMatrix::tridiagonal(3, -1.0, 2.0, -1.0);
        let c = BandedMatrix::tridiagonal(3, -0.5, 0.0, 0.5);
        let sum = s.combine(1.0, &c, 1.0).unwrap();
        assert_eq!(sum.get(0, 1), -0.5);
        assert_eq!(sum.get(1, 0), -1.5);
        let ct = c.transpose();
        assert_eq!(ct.get(0, 1), -0.5);
        assert!(s.is_symmetric(0.0));
        assert!(!c.is_symmetric(0.0));
    }
}
