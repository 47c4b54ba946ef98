//! Stiffness, convection and load assembly for the four discretizations.
//!
//! Matrices are written in closed form on the uniform mesh; load vectors use
//! a Gauss rule on every element. Unknowns are the interior nodal values
//! `u_1 .. u_{n-1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::mesh::UniformMesh;
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Standard Galerkin with P1 trial and test functions.
    Linear,
    /// Petrov-Galerkin with bubble up-winded test functions.
    PG,
    /// Streamline diffusion.
    SD,
    /// Saddle point least squares with a C0-P2 test space.
    SPLS,
    /// Standard Galerkin with `eps = 0`.
    ReducedLinear,
    /// Saddle point least squares with `eps = 0`.
    ReducedSPLS,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::PG => "pg",
            Method::SD => "sd",
            Method::SPLS => "spls",
            Method::ReducedLinear => "reduced-linear",
            Method::ReducedSPLS => "reduced-spls",
        }
    }

    /// Single-letter suffix used in table headers (`L`, `P`, `D`, `S`).
    pub fn tag(self) -> &'static str {
        match self {
            Method::Linear | Method::ReducedLinear => "L",
            Method::PG => "P",
            Method::SD => "D",
            Method::SPLS | Method::ReducedSPLS => "S",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Method::Linear,
            Method::PG,
            Method::SD,
            Method::SPLS,
            Method::ReducedLinear,
            Method::ReducedSPLS,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }

    pub fn is_saddle(self) -> bool {
        matches!(self, Method::SPLS | Method::ReducedSPLS)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sparse rows of the rectangular constraint block.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    /// `B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `B^T y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.rows.iter().zip(y) {
            for &(j, v) in r {
                out[j] += v * yi;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows.len() * self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                out[i * self.cols + j] += v;
            }
        }
        out
    }
}

/// Blocks of the saddle point system `[A B^T; B 0] [w; u] = [F; 0]`.
///
/// The test space is ordered `B_1, phi_1, B_2, phi_2, ..., phi_{n-1}, B_n`,
/// so bubble `B_i` has index `2(i-1)` and hat `phi_j` has index `2j-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleBlocks {
    /// `(v_l', v_k')`, symmetric positive definite with bandwidth 2.
    pub a: BandedMatrix,
    /// Row `j` holds `eps (phi_j', v_k') + (phi_j', v_k)`.
    pub b: SparseRows,
    /// `(f, v_k)`.
    pub load: Vec<f64>,
}

/// Index of bubble `B_i` (1-based) in the saddle test ordering.
#[inline]
pub fn v_bubble(i: usize) -> usize {
    2 * (i - 1)
}

/// Index of hat `phi_j` (1-based) in the saddle test ordering.
#[inline]
pub fn v_hat(j: usize) -> usize {
    2 * j - 1
}

/// Interleaved index of bubble `B_i` in the full saddle system.
#[inline]
pub fn full_bubble(i: usize) -> usize {
    3 * (i - 1)
}

/// Interleaved index of the hat coefficient `w_j` in the full saddle system.
#[inline]
pub fn full_hat(j: usize) -> usize {
    3 * (j - 1) + 1
}

/// Interleaved index of the trial unknown `u_j` in the full saddle system.
#[inline]
pub fn full_trial(j: usize) -> usize {
    3 * (j - 1) + 2
}

/// Linear system produced by one of the assemblers.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub method: Method,
    pub mesh: UniformMesh,
    pub epsilon: f64,
    /// Nodal system of size `n-1`, or the interleaved saddle system of size
    /// `3n-2` ordered `B_1, w_1, u_1, B_2, ..., u_{n-1}, B_n`.
    pub matrix: BandedMatrix,
    pub rhs: Vec<f64>,
    pub saddle: Option<SaddleBlocks>,
}

/// `S = tridiag(-1, 2, -1)`, so that `(phi_i', phi_j') = S_{ij} / h`.
pub fn assemble_s(mesh: &UniformMesh) -> BandedMatrix {
    BandedMatrix::tridiagonal(mesh.interior(), -1.0, 2.0, -1.0)
}

/// `C_{ji} = (phi_i', phi_j)`: `+1/2` above and `-1/2` below the diagonal.
pub fn assemble_c(mesh: &UniformMesh) -> BandedMatrix {
    BandedMatrix::tridiagonal(mesh.interior(), -0.5, 0.0, 0.5)
}

fn element_integrals<F, G>(mesh: &UniformMesh, rule: &GaussLegendre, f: &F, mut g: G)
where
    F: Fn(f64) -> f64 + ?Sized,
    G: FnMut(usize, f64, f64, f64),
{
    let h = mesh.h();
    for i in 1..=mesh.n() {
        let (a, b) = mesh.element(i);
        for (x, w) in rule.mapped(a, b) {
            let t = (x - a) / h;
            g(i, t, w, w * f(x));
        }
    }
}

/// `(f, phi_j)` for the interior hats.
pub fn assemble_load_p1<F: Fn(f64) -> f64 + ?Sized>(
    mesh: &UniformMesh,
    f: &F,
    rule: &GaussLegendre,
) -> Vec<f64> {
    let n = mesh.n();
    let mut out = vec![0.0; n - 1];
    element_integrals(mesh, rule, f, |i, t, _, wf| {
        if i >= 2 {
            out[i - 2] += wf * (1.0 - t);
        }
        if i < n {
            out[i - 1] += wf * t;
        }
    });
    out
}

/// `(f, B_i)` for `i = 1..=n`.
pub fn assemble_load_bubbles<F: Fn(f64) -> f64 + ?Sized>(
    mesh: &UniformMesh,
    f: &F,
    rule: &GaussLegendre,
) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n()];
    element_integrals(mesh, rule, f, |i, t, _, wf| {
        out[i - 1] += wf * 4.0 * t * (1.0 - t);
    });
    out
}

/// `(f, phi_j')` for the interior hats.
pub fn assemble_load_p1_slope<F: Fn(f64) -> f64 + ?Sized>(
    mesh: &UniformMesh,
    f: &F,
    rule: &GaussLegendre,
) -> Vec<f64> {
    let n = mesh.n();
    let inv_h = n as f64;
    let mut out = vec![0.0; n - 1];
    element_integrals(mesh, rule, f, |i, _, _, wf| {
        if i >= 2 {
            out[i - 2] -= wf * inv_h;
        }
        if i < n {
            out[i - 1] += wf * inv_h;
        }
    });
    out
}

/// Builds the linear systems for a fixed mesh and diffusion coefficient.
#[derive(Debug, Clone)]
pub struct Assembler {
    mesh: UniformMesh,
    eps: f64,
    rule: GaussLegendre,
}

/// Gauss points per element used for load vectors by default.
pub const DEFAULT_LOAD_POINTS: usize = 5;

impl Assembler {
    /// `eps = 0` is allowed and gives the reduced problem.
    pub fn new(mesh: UniformMesh, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be non-negative"));
        }
        Ok(Self {
            mesh,
            eps,
            rule: GaussLegendre::new(DEFAULT_LOAD_POINTS),
        })
    }

    pub fn with_quad_points(mut self, points: usize) -> Self {
        self.rule = GaussLegendre::new(points);
        self
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    fn checked_load(&self, load: Vec<f64>) -> Result<Vec<f64>> {
        if load.iter().all(|v| v.is_finite()) {
            Ok(load)
        } else {
            Err(Error::NonFinite("load vector"))
        }
    }

    /// `(k S + C)` with `k` the coefficient of `S`.
    fn nodal_matrix(&self, k: f64) -> BandedMatrix {
        let m = self.mesh.interior();
        BandedMatrix::tridiagonal(m, -k - 0.5, 2.0 * k, -k + 0.5)
    }

    fn system(&self, method: Method, matrix: BandedMatrix, rhs: Vec<f64>) -> Result<AssembledSystem> {
        Ok(AssembledSystem {
            method,
            mesh: self.mesh,
            epsilon: self.eps,
            matrix,
            rhs: self.checked_load(rhs)?,
            saddle: None,
        })
    }

    /// Standard Galerkin: `(eps/h) S + C`.
    pub fn standard<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> Result<AssembledSystem> {
        let method = if self.eps == 0.0 {
            Method::ReducedLinear
        } else {
            Method::Linear
        };
        let k = self.eps / self.mesh.h();
        self.system(method, self.nodal_matrix(k), assemble_load_p1(&self.mesh, f, &self.rule))
    }

    /// Petrov-Galerkin with test functions `phi_j + B_j - B_{j+1}`.
    pub fn pg<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> Result<AssembledSystem> {
        self.pg_weighted(1.0, f)
    }

    /// Petrov-Galerkin with test functions `phi_j + sigma (B_j - B_{j+1})`.
    ///
    /// The bubbles add `(2 sigma / 3) S` to the Galerkin matrix since
    /// `(phi_i', B_j) = 2/3 h phi_i'|_{K_j}` and `(phi_i', B_j') = 0`.
    pub fn pg_weighted<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        sigma: f64,
        f: &F,
    ) -> Result<AssembledSystem> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter("bubble weight must be non-negative"));
        }
        let k = self.eps / self.mesh.h() + 2.0 * sigma / 3.0;
        let mut rhs = assemble_load_p1(&self.mesh, f, &self.rule);
        let bub = assemble_load_bubbles(&self.mesh, f, &self.rule);
        for (j, r) in rhs.iter_mut().enumerate() {
            *r += sigma * (bub[j] - bub[j + 1]);
        }
        self.system(Method::PG, self.nodal_matrix(k), rhs)
    }

    /// Streamline diffusion: `((eps + delta)/h) S + C` with load
    /// `(f, phi_j) + delta (f, phi_j')`.
    pub fn sd<F: Fn(f64) -> f64 + ?Sized>(&self, delta: f64, f: &F) -> Result<AssembledSystem> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("delta must be non-negative"));
        }
        let k = (self.eps + delta) / self.mesh.h();
        let mut rhs = assemble_load_p1(&self.mesh, f, &self.rule);
        let slope = assemble_load_p1_slope(&self.mesh, f, &self.rule);
        for (r, s) in rhs.iter_mut().zip(&slope) {
            *r += delta * s;
        }
        self.system(Method::SD, self.nodal_matrix(k), rhs)
    }

    /// Default streamline diffusion weight `2h/3`.
    pub fn default_delta(&self) -> f64 {
        2.0 * self.mesh.h() / 3.0
    }

    /// Saddle point least squares system with the C0-P2 test space.
    pub fn spls<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> Result<AssembledSystem> {
        let n = self.mesh.n();
        let h = self.mesh.h();
        let eps = self.eps;
        let method = if eps == 0.0 {
            Method::ReducedSPLS
        } else {
            Method::SPLS
        };

        let dim_v = 2 * n - 1;
        let mut a = BandedMatrix::zeros(dim_v, 2, 2);
        for i in 1..=n {
            a.set(v_bubble(i), v_bubble(i), 16.0 / (3.0 * h));
        }
        for j in 1..n {
            a.set(v_hat(j), v_hat(j), 2.0 / h);
            if j + 1 < n {
                a.set(v_hat(j), v_hat(j + 1), -1.0 / h);
                a.set(v_hat(j + 1), v_hat(j), -1.0 / h);
            }
        }

        let mut rows = Vec::with_capacity(n - 1);
        for j in 1..n {
            let mut r = Vec::with_capacity(5);
            if j > 1 {
                r.push((v_hat(j - 1), -eps / h + 0.5));
            }
            r.push((v_bubble(j), 2.0 / 3.0));
            r.push((v_hat(j), 2.0 * eps / h));
            r.push((v_bubble(j + 1), -2.0 / 3.0));
            if j + 1 < n {
                r.push((v_hat(j + 1), -eps / h - 0.5));
            }
            rows.push(r);
        }
        let b = SparseRows { cols: dim_v, rows };

        let hats = assemble_load_p1(&self.mesh, f, &self.rule);
        let bubs = assemble_load_bubbles(&self.mesh, f, &self.rule);
        let mut load = vec![0.0; dim_v];
        for i in 1..=n {
            load[v_bubble(i)] = bubs[i - 1];
        }
        for j in 1..n {
            load[v_hat(j)] = hats[j - 1];
        }
        let load = self.checked_load(load)?;

        // interleaved full system
        let to_full = |k: usize| -> usize {
            if k.is_multiple_of(2) {
                full_bubble(k / 2 + 1)
            } else {
                full_hat(k.div_ceil(2))
            }
        };
        let dim = 3 * n - 2;
        let mut matrix = BandedMatrix::zeros(dim, 4, 4);
        let mut rhs = vec![0.0; dim];
        for k in 0..dim_v {
            rhs[to_full(k)] = load[k];
            for l in a.row_span(k) {
                let v = a.get(k, l);
                if v != 0.0 {
                    matrix.set(to_full(k), to_full(l), v);
                }
            }
        }
        for (j0, r) in b.rows.iter().enumerate() {
            let uj = full_trial(j0 + 1);
            for &(k, v) in r {
                matrix.add(uj, to_full(k), v);
                matrix.add(to_full(k), uj, v);
            }
        }

        Ok(AssembledSystem {
            method,
            mesh: self.mesh,
            epsilon: eps,
            matrix,
            rhs,
            saddle: Some(SaddleBlocks { a, b, load }),
        })
    }

    /// Dispatches on `method`; `delta` is only read by streamline diffusion
    /// and defaults to `2h/3`.
    pub fn assemble<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        method: Method,
        f: &F,
        delta: Option<f64>,
    ) -> Result<AssembledSystem> {
        let reduced = matches!(method, Method::ReducedLinear | Method::ReducedSPLS);
        if reduced && self.eps != 0.0 {
            let zero = Assembler {
                eps: 0.0,
                ..self.clone()
            };
            return zero.assemble(method, f, delta);
        }
        match method {
            Method::Linear | Method::ReducedLinear => self.standard(f),
            Method::PG => self.pg(f),
            Method::SD => self.sd(delta.unwrap_or_else(|| self.default_delta()), f),
            Method::SPLS | Method::ReducedSPLS => self.spls(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    fn asm(n: usize, eps: f64) -> Assembler {
        Assembler::new(build_mesh(n).unwrap(), eps).unwrap()
    }

    #[test]
    fn s_and_c_shapes() {
        let m = build_mesh(4).unwrap();
        let s = assemble_s(&m);
        assert_eq!(s.to_dense(), [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let c = assemble_c(&m);
        assert_eq!(c.to_dense(), [0.0, 0.5, 0.0, -0.5, 0.0, 0.5, 0.0, -0.5, 0.0]);
    }

    #[test]
    fn reduced_standard_is_c() {
        let a = asm(6, 0.0);
        let sys = a.standard(&|_| 1.0).unwrap();
        assert_eq!(sys.method, Method::ReducedLinear);
        assert_eq!(sys.matrix, assemble_c(a.mesh()));
    }

    #[test]
    fn load_of_constant() {
        let a = asm(8, 1e-3);
        let h = a.mesh().h();
        let l = assemble_load_p1(a.mesh(), &|_| 1.0, a.rule());
        assert!(l.iter().all(|v| (v - h).abs() < 1e-15));
        let b = assemble_load_bubbles(a.mesh(), &|_| 1.0, a.rule());
        assert!(b.iter().all(|v| (v - 2.0 * h / 3.0).abs() < 1e-15));
        let s = assemble_load_p1_slope(a.mesh(), &|_| 1.0, a.rule());
        assert!(s.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn pg_matrix_coefficient() {
        let a = asm(10, 0.0);
        let sys = a.pg(&|_| 1.0).unwrap();
        let h = a.mesh().h();
        let want = assemble_s(a.mesh())
            .combine(2.0 / 3.0, &assemble_c(a.mesh()), 1.0)
            .unwrap();
        for i in 0..9 {
            for j in sys.matrix.row_span(i) {
                assert!((sys.matrix.get(i, j) - want.get(i, j)).abs() < 1e-14);
            }
        }
        assert!(h > 0.0);
    }

    #[test]
    fn pg_equals_sd_for_default_delta() {
        let a = asm(16, 1e-4);
        let pg = a.pg(&|x: f64| 2.0 * x).unwrap();
        let sd = a.sd(a.default_delta(), &|x: f64| 2.0 * x).unwrap();
        for i in 0..15 {
            for j in pg.matrix.row_span(i) {
                assert!((pg.matrix.get(i, j) - sd.matrix.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(Assembler::new(build_mesh(4).unwrap(), -1.0).is_err());
        assert!(asm(4, 1.0).sd(-0.1, &|_| 1.0).is_err());
        assert!(asm(4, 1.0).pg_weighted(-1.0, &|_| 1.0).is_err());
    }

    #[test]
    fn non_finite_load_rejected() {
        let e = asm(4, 1.0).standard(&|_| f64::NAN).unwrap_err();
        assert_eq!(e, Error::NonFinite("load vector"));
    }

    #[test]
    fn saddle_structure() {
        let a = asm(5, 0.1);
        let sys = a.spls(&|_| 1.0).unwrap();
        assert_eq!(sys.matrix.dim(), 13);
        assert_eq!(sys.matrix.lower(), 4);
        assert!(sys.matrix.is_symmetric(0.0));
        let blocks = sys.saddle.as_ref().unwrap();
        assert!(blocks.a.is_symmetric(0.0));
        assert_eq!(blocks.b.rows.len(), 4);
        // zero block on the trial unknowns
        for j in 1..5 {
            for k in 1..5 {
                assert_eq!(sys.matrix.get(full_trial(j), full_trial(k)), 0.0);
            }
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Linear, Method::PG, Method::SD, Method::SPLS] {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("nope"), None);
    }
}
