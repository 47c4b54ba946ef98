//! Direct solvers for the assembled systems and discrete solutions.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{full_trial, v_bubble, v_hat, AssembledSystem, Method, SaddleBlocks};
use crate::banded::BandedMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::mesh::UniformMesh;

/// Finite element space of a [`DiscreteSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Coefficients are the interior nodal values `u_1 .. u_{n-1}`.
    P1,
    /// Hierarchical C0-P2: hats `w_1 .. w_{n-1}` followed by bubbles
    /// `b_1 .. b_n`.
    P2Aux,
}

/// Finite element function on a uniform mesh with zero boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    mesh: UniformMesh,
    space: Space,
    method: Option<Method>,
    coefficients: Vec<f64>,
}

impl DiscreteSolution {
    /// Panics if the coefficient count does not match the space.
    pub fn new(mesh: UniformMesh, space: Space, method: Option<Method>, coefficients: Vec<f64>) -> Self {
        let want = match space {
            Space::P1 => mesh.n() - 1,
            Space::P2Aux => 2 * mesh.n() - 1,
        };
        assert_eq!(coefficients.len(), want, "coefficient count");
        Self {
            mesh,
            space,
            method,
            coefficients,
        }
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn method(&self) -> Option<Method> {
        self.method
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Nodal values including the two zero boundary values.
    pub fn nodal_values(&self) -> Vec<f64> {
        let n = self.mesh.n();
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        out.extend_from_slice(&self.coefficients[..n - 1]);
        out.push(0.0);
        out
    }

    #[inline]
    fn nodal(&self, j: usize) -> f64 {
        if j == 0 || j == self.mesh.n() {
            0.0
        } else {
            self.coefficients[j - 1]
        }
    }

    #[inline]
    fn bubble(&self, i: usize) -> f64 {
        match self.space {
            Space::P1 => 0.0,
            Space::P2Aux => self.coefficients[self.mesh.n() - 2 + i],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.mesh.locate(x);
        self.nodal(i - 1) * (1.0 - t) + self.nodal(i) * t + self.bubble(i) * 4.0 * t * (1.0 - t)
    }

    /// Derivative on the element containing `x` (right limit at nodes).
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let (i, t) = self.mesh.locate(x);
        let inv_h = self.mesh.n() as f64;
        (self.nodal(i) - self.nodal(i - 1)) * inv_h + self.bubble(i) * 4.0 * (1.0 - 2.0 * t) * inv_h
    }

    /// Value and derivative with the element index given explicitly, for
    /// quadrature points that sit on element boundaries.
    pub fn eval_on_element(&self, elem: usize, x: f64) -> (f64, f64) {
        let (a, _) = self.mesh.element(elem);
        let inv_h = self.mesh.n() as f64;
        let t = (x - a) * inv_h;
        let (l, r, b) = (self.nodal(elem - 1), self.nodal(elem), self.bubble(elem));
        (
            l * (1.0 - t) + r * t + b * 4.0 * t * (1.0 - t),
            (r - l) * inv_h + b * 4.0 * (1.0 - 2.0 * t) * inv_h,
        )
    }
}

/// Trial and test components of a saddle point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub u: DiscreteSolution,
    pub w: DiscreteSolution,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Relative residual threshold accepted by the direct solvers.
pub const RESIDUAL_TOL: f64 = 1e-10;

fn check_residual(matrix: &BandedMatrix, x: &[f64], rhs: &[f64]) -> Result<()> {
    let ax = matrix.matvec(x);
    let r = inf_norm(&ax.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
    let row_norm = (0..matrix.dim())
        .map(|i| matrix.row_span(i).map(|j| libm::fabs(matrix.get(i, j))).sum::<f64>())
        .fold(0.0, f64::max);
    let scale = inf_norm(rhs) + row_norm * inf_norm(x);
    let tol = RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE);
    if !r.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear solve"));
    }
    if r > tol {
        return Err(Error::Accuracy {
            estimate: r,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Banded LU with one step of iterative refinement.
fn lu_refined(matrix: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.dim() {
        return Err(Error::Dimension {
            expected: matrix.dim(),
            found: rhs.len(),
        });
    }
    let lu = matrix.lu()?;
    let mut x = lu.solve(rhs);
    let ax = matrix.matvec(&x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let dx = lu.solve(&r);
    x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
    check_residual(matrix, &x, rhs)?;
    Ok(x)
}

/// Solves a nodal (non saddle point) system.
pub fn solve_banded(sys: &AssembledSystem) -> Result<DiscreteSolution> {
    if sys.saddle.is_some() {
        return Err(Error::Precondition("saddle point system: use solve_saddle"));
    }
    let x = lu_refined(&sys.matrix, &sys.rhs)?;
    Ok(DiscreteSolution::new(sys.mesh, Space::P1, Some(sys.method), x))
}

/// Largest `n` for which the saddle solver goes through the dense Schur
/// complement; larger systems use banded LU on the interleaved matrix.
pub const SCHUR_LIMIT: usize = 128;

/// Solves the saddle point system `[A B^T; B 0] [w; u] = [F; 0]`.
///
/// Small systems eliminate `w` through `S = B A^{-1} B^T`, whose Cholesky
/// factorization fails exactly when the discrete inf-sup condition does.
pub fn solve_saddle(sys: &AssembledSystem) -> Result<SaddleSolution> {
    let blocks = sys
        .saddle
        .as_ref()
        .ok_or(Error::Precondition("not a saddle point system"))?;
    let n = sys.mesh.n();
    let (w_v, u) = if n <= SCHUR_LIMIT {
        solve_schur(blocks)?
    } else {
        let x = lu_refined(&sys.matrix, &sys.rhs).map_err(|e| match e {
            Error::Singular { .. } => Error::InfSupFailure,
            e => e,
        })?;
        let u: Vec<f64> = (1..n).map(|j| x[full_trial(j)]).collect();
        let w_v: Vec<f64> = (0..2 * n - 1)
            .map(|k| {
                if k % 2 == 0 {
                    x[crate::assembly::full_bubble(k / 2 + 1)]
                } else {
                    x[crate::assembly::full_hat(k.div_ceil(2))]
                }
            })
            .collect();
        (w_v, u)
    };
    let mut w = Vec::with_capacity(2 * n - 1);
    w.extend((1..n).map(|j| w_v[v_hat(j)]));
    w.extend((1..=n).map(|i| w_v[v_bubble(i)]));
    Ok(SaddleSolution {
        u: DiscreteSolution::new(sys.mesh, Space::P1, Some(sys.method), u),
        w: DiscreteSolution::new(sys.mesh, Space::P2Aux, Some(sys.method), w),
    })
}

/// Dense `B A^{-1} B^T` and the factored `A`.
fn schur_complement(blocks: &SaddleBlocks) -> Result<(DenseMatrix, crate::banded::BandedCholesky)> {
    let m = blocks.b.rows.len();
    let chol = blocks.a.cholesky()?;
    let mut s = DenseMatrix::zeros(m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        let col = chol.solve(&blocks.b.apply_transpose(&e));
        e[j] = 0.0;
        let bcol = blocks.b.apply(&col);
        for (i, v) in bcol.into_iter().enumerate() {
            s.set(i, j, v);
        }
    }
    // symmetrize against roundoff
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (s.get(i, j) + s.get(j, i));
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    Ok((s, chol))
}

fn solve_schur(blocks: &SaddleBlocks) -> Result<(Vec<f64>, Vec<f64>)> {
    let (s, chol) = schur_complement(blocks)?;
    let s_chol = s.cholesky().map_err(|_| Error::InfSupFailure)?;
    // B A^{-1} F = S u, then A w = F - B^T u
    let a_inv_f = chol.solve(&blocks.load);
    let u = s_chol.solve(&blocks.b.apply(&a_inv_f));
    let btu = blocks.b.apply_transpose(&u);
    let r: Vec<f64> = blocks.load.iter().zip(&btu).map(|(f, b)| f - b).collect();
    let w = chol.solve(&r);
    if u.iter().chain(&w).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("saddle solve"));
    }
    Ok((w, u))
}

/// Explicit solution of the reduced Galerkin system `C u = F` for odd `n`.
///
/// Each row couples `u_{j-1}` and `u_{j+1}` only, so even-indexed values are
/// swept forward from `u_0 = 0` and odd-indexed values backward from
/// `u_n = 0`.
pub fn solve_reduced_decoupled(mesh: &UniformMesh, load: &[f64]) -> Result<DiscreteSolution> {
    let n = mesh.n();
    if n.is_multiple_of(2) {
        return Err(Error::NotDecoupled { n });
    }
    if load.len() != n - 1 {
        return Err(Error::Dimension {
            expected: n - 1,
            found: load.len(),
        });
    }
    let mut u = vec![0.0; n + 1];
    for j in (2..n).step_by(2) {
        u[j] = u[j - 2] + 2.0 * load[j - 2];
    }
    for j in (1..n - 1).rev().step_by(2) {
        u[j] = u[j + 2] - 2.0 * load[j];
    }
    Ok(DiscreteSolution::new(
        *mesh,
        Space::P1,
        Some(Method::ReducedLinear),
        u[1..n].to_vec(),
    ))
}

/// Solves any assembled system and returns the trial component.
pub fn solve_system(sys: &AssembledSystem) -> Result<DiscreteSolution> {
    if sys.saddle.is_some() {
        Ok(solve_saddle(sys)?.u)
    } else {
        solve_banded(sys)
    }
}

/// Discrete inf-sup constants of the saddle point pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSup {
    /// `inf_u sup_v b(u, v) / (|v|_1 ||u||)`.
    pub lower: f64,
    /// `sup_u sup_v b(u, v) / (|v|_1 ||u||)`.
    pub upper: f64,
}

/// Largest mesh accepted by [`discrete_inf_sup`].
pub const INF_SUP_MAX_N: usize = 64;

/// Square roots of the extreme eigenvalues of `B A^{-1} B^T x = lambda Q x`,
/// with `Q` the P1 mass matrix.
pub fn discrete_inf_sup(blocks: &SaddleBlocks, mesh: &UniformMesh) -> Result<InfSup> {
    let n = mesh.n();
    if n > INF_SUP_MAX_N {
        return Err(Error::Precondition("inf-sup probe limited to n <= 64"));
    }
    let (s, _) = schur_complement(blocks)?;
    let h = mesh.h();
    let mut q = DenseMatrix::zeros(n - 1);
    for i in 0..n - 1 {
        q.set(i, i, 2.0 * h / 3.0);
        if i + 1 < n - 1 {
            q.set(i, i + 1, h / 6.0);
            q.set(i + 1, i, h / 6.0);
        }
    }
    let ev = q.cholesky()?.congruence(&s).symmetric_eigenvalues()?;
    let lo = ev[0];
    let hi = ev[ev.len() - 1];
    if lo <= 0.0 {
        return Err(Error::InfSupFailure);
    }
    Ok(InfSup {
        lower: libm::sqrt(lo),
        upper: libm::sqrt(hi),
    })
}
