//! Finite element kernels for `-eps u'' + u' = f` on `(0, 1)` with
//! homogeneous Dirichlet data.
//!
//! Four discretizations share one uniform mesh: standard Galerkin,
//! bubble up-winded Petrov-Galerkin, streamline diffusion and a saddle point
//! least squares method with a C0-P2 test space. The crate is `no_std` and
//! only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assembly;
pub mod banded;
pub mod dense;
pub mod error;
pub mod exact;
pub mod linsolve;
pub mod mesh;
pub mod norms;
pub mod quad;

pub use assembly::{AssembledSystem, Assembler, Method};
pub use error::{Error, Result};
pub use exact::{ProblemInstance, RhsKind};
pub use linsolve::{DiscreteSolution, SaddleSolution, Space};
pub use mesh::{build_mesh, BasisId, BasisKind, Deriv, UniformMesh};
pub use norms::{ErrorOptions, ErrorReport, Norm};
