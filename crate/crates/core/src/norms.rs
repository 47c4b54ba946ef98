//! Error norms between exact and discrete solutions.
//!
//! All norms come from one pass of per-element Gauss quadrature. Elements
//! that meet the outflow layer `[1 - kappa, 1]`, `kappa = min(1, 10 eps |ln eps|)`,
//! are cut into geometrically graded pieces down to width `min(eps, h) / 4`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::ProblemInstance;
use crate::linsolve::{DiscreteSolution, Space};
use crate::mesh::UniformMesh;
use crate::quad::{geometric_toward_right, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `||u - u_h||`
    pub l2: f64,
    /// `|u - u_h|_1`
    pub h1_semi: f64,
    /// `sqrt((eps + delta) |u - u_h|_1^2)`
    pub sd: f64,
    /// `sqrt(eps |u - u_h|_1^2 + ||u - u_h||^2)`
    pub balanced: f64,
    pub level: usize,
    pub h: f64,
}

/// Which column of an [`ErrorReport`] to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L2,
    H1Semi,
    Sd,
    Balanced,
}

impl Norm {
    pub const ALL: [Norm; 4] = [Norm::H1Semi, Norm::L2, Norm::Sd, Norm::Balanced];

    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::H1Semi => "h1",
            Norm::Sd => "sd",
            Norm::Balanced => "balanced",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.name() == s)
    }
}

impl ErrorReport {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L2 => self.l2,
            Norm::H1Semi => self.h1_semi,
            Norm::Sd => self.sd,
            Norm::Balanced => self.balanced,
        }
    }
}

/// Knobs of [`error_norms`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorOptions {
    /// Gauss points per (sub)element.
    pub quad_points: usize,
    /// Constant added to `u_h` before comparing.
    pub shift: f64,
    /// Measure only on this subinterval.
    pub interval: Option<(f64, f64)>,
    /// Grade the quadrature towards `x = 1`.
    pub grade_layer: bool,
    pub level: usize,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        Self {
            quad_points: 7,
            shift: 0.0,
            interval: None,
            grade_layer: true,
            level: 0,
        }
    }
}

/// Width of the region treated as boundary layer.
pub fn layer_width(eps: f64) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    (10.0 * eps * libm::fabs(libm::log(eps))).min(1.0)
}

/// Sub-break points used for element `i`.
fn element_breaks(mesh: &UniformMesh, i: usize, layer: &[f64], window: (f64, f64)) -> Vec<f64> {
    let (a, b) = mesh.element(i);
    let (lo, hi) = (a.max(window.0), b.min(window.1));
    let mut pts = alloc::vec![lo];
    pts.extend(layer.iter().copied().filter(|&g| g > lo && g < hi));
    pts.push(hi);
    pts
}

/// Squared L2 and H1-seminorm errors of `u_h + shift` on the chosen window.
fn squared_errors<U, D>(
    u: &U,
    du: &D,
    u_h: &DiscreteSolution,
    eps: f64,
    opts: &ErrorOptions,
) -> Result<(f64, f64)>
where
    U: Fn(f64) -> Result<f64> + ?Sized,
    D: Fn(f64) -> Result<f64> + ?Sized,
{
    let mesh = u_h.mesh();
    let rule = GaussLegendre::new(opts.quad_points);
    let window = opts.interval.unwrap_or((0.0, 1.0));
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter("empty error interval"));
    }
    let layer = if opts.grade_layer && eps > 0.0 {
        let kappa = layer_width(eps);
        geometric_toward_right(1.0 - kappa, 1.0, 0.25 * eps.min(mesh.h()))
    } else {
        Vec::new()
    };
    let (mut l2, mut h1) = (0.0, 0.0);
    for i in 1..=mesh.n() {
        let (a, b) = mesh.element(i);
        if b <= window.0 || a >= window.1 {
            continue;
        }
        let pts = element_breaks(mesh, i, &layer, window);
        for w in pts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for (x, wt) in rule.mapped(w[0], w[1]) {
                let (vh, dvh) = u_h.eval_on_element(i, x);
                let e0 = u(x)? - (vh + opts.shift);
                let e1 = du(x)? - dvh;
                l2 += wt * e0 * e0;
                h1 += wt * e1 * e1;
            }
        }
    }
    if !(l2.is_finite() && h1.is_finite()) {
        return Err(Error::NonFinite("error quadrature"));
    }
    Ok((l2, h1))
}

/// Error report from exact values `u`, derivatives `du`, diffusion `eps`
/// and streamline weight `delta`.
pub fn error_norms<U, D>(
    u: &U,
    du: &D,
    u_h: &DiscreteSolution,
    eps: f64,
    delta: f64,
    opts: &ErrorOptions,
) -> Result<ErrorReport>
where
    U: Fn(f64) -> Result<f64> + ?Sized,
    D: Fn(f64) -> Result<f64> + ?Sized,
{
    if !(eps >= 0.0 && delta >= 0.0) {
        return Err(Error::InvalidParameter("eps and delta must be non-negative"));
    }
    let (l2sq, h1sq) = squared_errors(u, du, u_h, eps, opts)?;
    Ok(ErrorReport {
        l2: libm::sqrt(l2sq),
        h1_semi: libm::sqrt(h1sq),
        sd: libm::sqrt((eps + delta) * h1sq),
        balanced: libm::sqrt(eps * h1sq + l2sq),
        level: opts.level,
        h: u_h.mesh().h(),
    })
}

/// [`error_norms`] against the exact solution of `problem`, with
/// `delta = 2h/3`.
pub fn problem_error_norms(
    problem: &ProblemInstance,
    u_h: &DiscreteSolution,
    opts: &ErrorOptions,
) -> Result<ErrorReport> {
    let delta = 2.0 * u_h.mesh().h() / 3.0;
    error_norms(
        &|x| problem.exact_u(x),
        &|x| problem.exact_du(x),
        u_h,
        problem.epsilon(),
        delta,
        opts,
    )
}

/// `order_i = log2(e_{i-1} / e_i)`, with `order_0 = 0`.
pub fn convergence_order(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter("errors must be positive"));
    }
    let mut out = Vec::with_capacity(errors.len());
    if !errors.is_empty() {
        out.push(0.0);
    }
    out.extend(errors.windows(2).map(|w| libm::log2(w[0] / w[1])));
    Ok(out)
}

/// Both sides of the interpolation error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolantBounds {
    /// `||u - I_h u||`
    pub l2_error: f64,
    /// `h / sqrt(2) ||f||_inf`, only valid when `int f = 0`.
    pub uniform_bound: Option<f64>,
    /// `2 h^2 ||f||_inf / (eps pi)`.
    pub eps_bound: f64,
}

impl InterpolantBounds {
    pub fn holds(&self) -> bool {
        let tol = 1e-14;
        self.l2_error <= self.eps_bound + tol
            && self.uniform_bound.is_none_or(|b| self.l2_error <= b + tol)
    }
}

/// Measures `||u - I_h u||` and evaluates both interpolation bounds.
pub fn interpolant_bounds_check(
    problem: &ProblemInstance,
    mesh: &UniformMesh,
) -> Result<InterpolantBounds> {
    let nodal = (1..mesh.n())
        .map(|j| problem.exact_u(mesh.node(j)))
        .collect::<Result<Vec<f64>>>()?;
    let ui = DiscreteSolution::new(*mesh, Space::P1, None, nodal);
    let (l2sq, _) = squared_errors(
        &|x| problem.exact_u(x),
        &|_| Ok(0.0),
        &ui,
        problem.epsilon(),
        &ErrorOptions::default(),
    )?;
    let (_, _, fsup) = problem.f_range();
    let h = mesh.h();
    let uniform_bound = if libm::fabs(problem.fbar()) <= 1e-12 {
        Some(h / core::f64::consts::SQRT_2 * fsup)
    } else {
        None
    };
    Ok(InterpolantBounds {
        l2_error: libm::sqrt(l2sq),
        uniform_bound,
        eps_bound: 2.0 * h * h * fsup / (problem.epsilon() * core::f64::consts::PI),
    })
}
