//! Uniform meshes of `[0, 1]` and the P1 / bubble / P2 basis functions.

use crate::error::{Error, Result};
use crate::linsolve::{DiscreteSolution, Space};

/// `n` equal subintervals of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    n: usize,
    h: f64,
}

impl UniformMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMesh { n });
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
        })
    }

    /// Number of subintervals.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node `x_j = j / n`, exact at both ends.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n);
        j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |j| self.node(j))
    }

    /// Interior node count, i.e. the P1 trial space dimension.
    #[inline]
    pub fn interior(&self) -> usize {
        self.n - 1
    }

    /// Element `i` (1-based) is `[x_{i-1}, x_i]`.
    #[inline]
    pub fn element(&self, i: usize) -> (f64, f64) {
        (self.node(i - 1), self.node(i))
    }

    /// Element containing `x`, taking the one to the right at interior nodes
    /// and the last element at `x = 1`. Also returns the local coordinate
    /// `t in [0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = x * self.n as f64;
        let i = (libm::floor(s) as isize + 1).clamp(1, self.n as isize) as usize;
        let t = (s - (i - 1) as f64).clamp(0.0, 1.0);
        (i, t)
    }
}

/// Builds the mesh with `n` subintervals; `n < 2` is rejected.
pub fn build_mesh(n: usize) -> Result<UniformMesh> {
    UniformMesh::new(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Hat function of interior node `j`, `1 <= j <= n-1`.
    P1Nodal,
    /// Hierarchical C0-P2 basis: indices `1..=n-1` are the hats, indices
    /// `n..=2n-1` are the bubbles `B_1..B_n`.
    P2,
    /// `B_i = 4 phi_{i-1} phi_i` on element `i`, `1 <= i <= n`.
    Bubble,
    /// Up-winded test function `phi_j + B_j - B_{j+1}`, `1 <= j <= n-1`.
    PGEnriched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisId {
    pub kind: BasisKind,
    pub index: usize,
}

impl BasisId {
    pub fn p1(index: usize) -> Self {
        Self {
            kind: BasisKind::P1Nodal,
            index,
        }
    }

    pub fn bubble(index: usize) -> Self {
        Self {
            kind: BasisKind::Bubble,
            index,
        }
    }

    pub fn p2(index: usize) -> Self {
        Self {
            kind: BasisKind::P2,
            index,
        }
    }

    pub fn pg(index: usize) -> Self {
        Self {
            kind: BasisKind::PGEnriched,
            index,
        }
    }
}

/// Which quantity [`eval_basis`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Value,
    First,
}

/// Value or derivative of a basis function at `x`.
///
/// Derivatives are piecewise; at a node the right-hand limit is returned
/// (left-hand limit at `x = 1`).
pub fn eval_basis(mesh: &UniformMesh, id: BasisId, x: f64, deriv: Deriv) -> Result<f64> {
    let n = mesh.n();
    let check = |lo: usize, hi: usize| {
        if id.index < lo || id.index > hi {
            Err(Error::InvalidBasis { index: id.index, n })
        } else {
            Ok(())
        }
    };
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition("basis evaluation point outside [0, 1]"));
    }
    let (elem, t) = mesh.locate(x);
    let inv_h = n as f64;
    match id.kind {
        BasisKind::P1Nodal => {
            check(1, n - 1)?;
            Ok(hat(id.index, elem, t, inv_h, deriv))
        }
        BasisKind::Bubble => {
            check(1, n)?;
            Ok(bubble(id.index, elem, t, inv_h, deriv))
        }
        BasisKind::P2 => {
            check(1, 2 * n - 1)?;
            if id.index < n {
                Ok(hat(id.index, elem, t, inv_h, deriv))
            } else {
                Ok(bubble(id.index - (n - 1), elem, t, inv_h, deriv))
            }
        }
        BasisKind::PGEnriched => {
            check(1, n - 1)?;
            let j = id.index;
            Ok(hat(j, elem, t, inv_h, deriv) + bubble(j, elem, t, inv_h, deriv)
                - bubble(j + 1, elem, t, inv_h, deriv))
        }
    }
}

#[inline]
fn hat(j: usize, elem: usize, t: f64, inv_h: f64, deriv: Deriv) -> f64 {
    if elem == j {
        match deriv {
            Deriv::Value => t,
            Deriv::First => inv_h,
        }
    } else if elem == j + 1 {
        match deriv {
            Deriv::Value => 1.0 - t,
            Deriv::First => -inv_h,
        }
    } else {
        0.0
    }
}

#[inline]
fn bubble(i: usize, elem: usize, t: f64, inv_h: f64, deriv: Deriv) -> f64 {
    if elem != i {
        return 0.0;
    }
    match deriv {
        Deriv::Value => 4.0 * t * (1.0 - t),
        Deriv::First => 4.0 * (1.0 - 2.0 * t) * inv_h,
    }
}

/// Nodal P1 interpolant with homogeneous boundary values.
pub fn p1_interpolant<F: Fn(f64) -> f64>(mesh: &UniformMesh, u: F) -> DiscreteSolution {
    let coefficients = (1..mesh.n()).map(|j| u(mesh.node(j))).collect();
    DiscreteSolution::new(*mesh, Space::P1, None, coefficients)
}
