//! Reference solutions of `-eps u'' + u' = f`, `u(0) = u(1) = 0`.
//!
//! Every exponential is written with a non-positive argument so that the
//! formulas stay finite for `eps` down to `1e-12`. The outflow layer sits at
//! `x = 1` and has width of order `eps |log eps|`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::quad::{geometric_toward_left, geometric_toward_right, Adaptive};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Right-hand sides used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhsKind {
    /// `f = 1`
    One,
    /// `f = 1 - 2x` (zero mean)
    OneMinus2x,
    /// `f = 2x`
    TwoX,
    /// `f = cos(7 pi x / 2)`
    Cos7HalfPi,
    /// `f = cos(pi x / 2)`
    CosHalfPi,
    /// `f = -eps u'' + u'` for `u = -x^3 + 1.5 x^2 - 0.5 x`
    CubicManufactured,
    Custom,
}

impl RhsKind {
    pub const TAGGED: [RhsKind; 6] = [
        RhsKind::One,
        RhsKind::OneMinus2x,
        RhsKind::TwoX,
        RhsKind::Cos7HalfPi,
        RhsKind::CosHalfPi,
        RhsKind::CubicManufactured,
    ];

    /// Short name used on the command line and in file names.
    pub fn name(self) -> &'static str {
        match self {
            RhsKind::One => "one",
            RhsKind::OneMinus2x => "one-minus-2x",
            RhsKind::TwoX => "two-x",
            RhsKind::Cos7HalfPi => "cos7",
            RhsKind::CosHalfPi => "cos1",
            RhsKind::CubicManufactured => "cubic",
            RhsKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::TAGGED.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for RhsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Frequency `k` of the cosine right-hand sides `cos(k x)`.
fn cos_frequency(kind: RhsKind) -> Option<f64> {
    match kind {
        RhsKind::Cos7HalfPi => Some(3.5 * PI),
        RhsKind::CosHalfPi => Some(0.5 * PI),
        _ => None,
    }
}

/// `(e^{x/eps} - 1) / (e^{1/eps} - 1)`, the boundary layer profile.
#[inline]
pub fn layer(eps: f64, x: f64) -> f64 {
    libm::exp((x - 1.0) / eps) * (-libm::expm1(-x / eps)) / (-libm::expm1(-1.0 / eps))
}

/// First derivative of [`layer`]; the second derivative is this over `eps`.
#[inline]
pub fn layer_slope(eps: f64, x: f64) -> f64 {
    libm::exp((x - 1.0) / eps) / (eps * (-libm::expm1(-1.0 / eps)))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("epsilon must be positive"))
    }
}

/// Green's function `G(x, s)`, so that `u(x) = int_0^1 G(x, s) f(s) ds`.
pub fn green_kernel(eps: f64, x: f64, s: f64) -> Result<f64> {
    check_eps(eps)?;
    let denom = -libm::expm1(-1.0 / eps);
    let g = if s < x {
        (-libm::expm1((x - 1.0) / eps)) * (-libm::expm1(-s / eps)) / denom
    } else {
        libm::exp((x - s) / eps) * (-libm::expm1(-x / eps)) * (-libm::expm1((s - 1.0) / eps))
            / denom
    };
    Ok(g)
}

/// `dG/dx (x, s)`; jumps by `-1/eps` across `s = x`.
pub fn green_kernel_dx(eps: f64, x: f64, s: f64) -> Result<f64> {
    check_eps(eps)?;
    let denom = -libm::expm1(-1.0 / eps);
    let g = if s < x {
        -libm::exp((x - 1.0) / eps) * (-libm::expm1(-s / eps)) / (eps * denom)
    } else {
        libm::exp((x - s) / eps) * (-libm::expm1((s - 1.0) / eps)) / (eps * denom)
    };
    Ok(g)
}

/// Peak value `G(x, x)` of the kernel in `s`.
pub fn green_diagonal(eps: f64, x: f64) -> Result<f64> {
    green_kernel(eps, x, x)
}

/// `G_inf = (e^{1/(2 eps)} - 1) / (e^{1/(2 eps)} + 1)`, an upper bound of `G`.
pub fn green_sup(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let e = libm::exp(-0.5 / eps);
    Ok((1.0 - e) / (1.0 + e))
}

/// Solution for `f = 1`: `u_1(x) = x - (e^{x/eps} - 1) / (e^{1/eps} - 1)`.
pub fn u1_closed(eps: f64, x: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(x - layer(eps, x))
}

/// Quadrature break points adapted to the kernel at `x`: layers at `s = 0`,
/// at `s = x+` and at `s = 1`.
fn green_breaks(eps: f64, x: f64) -> (Vec<f64>, Vec<f64>) {
    let w = eps / 4.0;
    let left = if x > 0.0 {
        geometric_toward_left(0.0, x, w)
    } else {
        Vec::new()
    };
    let right = if x < 1.0 {
        let mid = 0.5 * (x + 1.0);
        let mut r = geometric_toward_left(x, mid, w);
        let tail = geometric_toward_right(mid, 1.0, w);
        r.extend_from_slice(&tail[1..]);
        r
    } else {
        Vec::new()
    };
    (left, right)
}

fn green_integral<K, F>(eps: f64, x: f64, kernel: K, f: &F, tol: f64) -> Result<f64>
where
    K: Fn(f64, f64, f64) -> Result<f64>,
    F: Fn(f64) -> f64 + ?Sized,
{
    check_eps(eps)?;
    let (left, right) = green_breaks(eps, x);
    let q = Adaptive::new(0.5 * tol);
    let integrand = |s: f64| kernel(eps, x, s).unwrap_or(f64::NAN) * f(s);
    let a = q.integrate(&left, &integrand)?;
    let b = q.integrate(&right, &integrand)?;
    Ok(a + b)
}

/// `int_0^1 G(x, s) f(s) ds` by graded adaptive Gauss quadrature.
pub fn green_solution<F: Fn(f64) -> f64 + ?Sized>(eps: f64, f: &F, x: f64, tol: f64) -> Result<f64> {
    green_integral(eps, x, green_kernel, f, tol)
}

/// `int_0^1 dG/dx(x, s) f(s) ds`.
pub fn green_solution_dx<F: Fn(f64) -> f64 + ?Sized>(
    eps: f64,
    f: &F,
    x: f64,
    tol: f64,
) -> Result<f64> {
    green_integral(eps, x, green_kernel_dx, f, tol)
}

/// Default absolute tolerance of the Green quadrature.
pub const GREEN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
enum Closed {
    One,
    OneMinus2x,
    TwoX,
    Cubic,
    Cos { k: f64 },
}

/// Model problem data: diffusion `eps`, right-hand side and, when known,
/// the exact solution.
#[derive(Clone)]
pub struct ProblemInstance {
    eps: f64,
    kind: RhsKind,
    f: ScalarFn,
    fbar: f64,
    closed: Option<Closed>,
    custom_exact: Option<(ScalarFn, ScalarFn)>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("eps", &self.eps)
            .field("kind", &self.kind)
            .field("fbar", &self.fbar)
            .finish()
    }
}

impl ProblemInstance {
    /// One of the tagged right-hand sides; `Custom` is rejected here.
    pub fn new(eps: f64, kind: RhsKind) -> Result<Self> {
        check_eps(eps)?;
        let (f, fbar, closed): (ScalarFn, f64, Closed) = match kind {
            RhsKind::One => (Arc::new(|_| 1.0), 1.0, Closed::One),
            RhsKind::OneMinus2x => (Arc::new(|x| 1.0 - 2.0 * x), 0.0, Closed::OneMinus2x),
            RhsKind::TwoX => (Arc::new(|x| 2.0 * x), 1.0, Closed::TwoX),
            RhsKind::Cos7HalfPi | RhsKind::CosHalfPi => {
                let k = cos_frequency(kind).unwrap();
                (
                    Arc::new(move |x| libm::cos(k * x)),
                    libm::sin(k) / k,
                    Closed::Cos { k },
                )
            }
            RhsKind::CubicManufactured => (
                Arc::new(move |x| -3.0 * x * x + (3.0 + 6.0 * eps) * x - 0.5 - 3.0 * eps),
                0.0,
                Closed::Cubic,
            ),
            RhsKind::Custom => {
                return Err(Error::InvalidParameter(
                    "use ProblemInstance::custom for custom data",
                ))
            }
        };
        Ok(Self {
            eps,
            kind,
            f,
            fbar,
            closed: Some(closed),
            custom_exact: None,
        })
    }

    /// User supplied data; `exact` is `(u, u')` when available.
    pub fn custom(eps: f64, f: ScalarFn, exact: Option<(ScalarFn, ScalarFn)>) -> Result<Self> {
        check_eps(eps)?;
        let g = f.clone();
        let fbar = Adaptive::new(1e-14).integrate(&[0.0, 0.5, 1.0], &move |x| g(x))?;
        Ok(Self {
            eps,
            kind: RhsKind::Custom,
            f,
            fbar,
            closed: None,
            custom_exact: exact,
        })
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn kind(&self) -> RhsKind {
        self.kind
    }

    /// Mean value `int_0^1 f`.
    #[inline]
    pub fn fbar(&self) -> f64 {
        self.fbar
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn rhs(&self) -> ScalarFn {
        self.f.clone()
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed.is_some() || self.custom_exact.is_some()
    }

    /// Exact solution at `x`: closed form when known, Green quadrature otherwise.
    pub fn exact_u(&self, x: f64) -> Result<f64> {
        exact_solution(self, x)
    }

    pub fn exact_du(&self, x: f64) -> Result<f64> {
        exact_derivative(self, x)
    }

    /// Second derivative; only available for closed forms.
    pub fn exact_d2u(&self, x: f64) -> Option<f64> {
        let eps = self.eps;
        let c = self.closed?;
        Some(match c {
            Closed::One => -layer_slope(eps, x) / eps,
            Closed::OneMinus2x => -2.0 + 2.0 * layer_slope(eps, x),
            Closed::TwoX => 2.0 - (1.0 + 2.0 * eps) * layer_slope(eps, x) / eps,
            Closed::Cubic => -6.0 * x + 3.0,
            Closed::Cos { k } => {
                let (a, b) = cos_particular(eps, k);
                let c2 = a - (a * libm::cos(k) + b * libm::sin(k));
                -k * k * (a * libm::cos(k * x) + b * libm::sin(k * x))
                    + c2 * layer_slope(eps, x) / eps
            }
        })
    }

    /// `w(x) = int_0^x f`, solution of the forward reduced problem.
    pub fn reduced_w(&self, x: f64) -> Result<f64> {
        match self.antiderivative() {
            Some(prim) => Ok(prim(x) - prim(0.0)),
            None => {
                let f = self.f.clone();
                Adaptive::new(1e-14).integrate(&[0.0, x], &move |s| f(s))
            }
        }
    }

    /// `theta(x) = -int_x^1 f`, solution of the backward reduced problem.
    pub fn reduced_theta(&self, x: f64) -> Result<f64> {
        match self.antiderivative() {
            Some(prim) => Ok(prim(x) - prim(1.0)),
            None => {
                let f = self.f.clone();
                Ok(-Adaptive::new(1e-14).integrate(&[x, 1.0], &move |s| f(s))?)
            }
        }
    }

    fn antiderivative(&self) -> Option<ScalarFn> {
        let eps = self.eps;
        Some(match self.kind {
            RhsKind::One => Arc::new(|x| x),
            RhsKind::OneMinus2x => Arc::new(|x| x - x * x),
            RhsKind::TwoX => Arc::new(|x| x * x),
            RhsKind::Cos7HalfPi | RhsKind::CosHalfPi => {
                let k = cos_frequency(self.kind)?;
                Arc::new(move |x| libm::sin(k * x) / k)
            }
            RhsKind::CubicManufactured => Arc::new(move |x| {
                -x * x * x + 0.5 * (3.0 + 6.0 * eps) * x * x - (0.5 + 3.0 * eps) * x
            }),
            RhsKind::Custom => return None,
        })
    }

    /// `(min f, max f, max |f|)` sampled on 10001 points.
    pub fn f_range(&self) -> (f64, f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..=10_000 {
            let v = self.f(k as f64 / 10_000.0);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi, libm::fabs(lo).max(libm::fabs(hi)))
    }

    /// `||f||_{L^1(0,1)}`.
    pub fn f_l1(&self) -> Result<f64> {
        let f = self.f.clone();
        let breaks: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        Adaptive::new(1e-13).integrate(&breaks, &move |x| libm::fabs(f(x)))
    }
}

/// Coefficients of the particular solution `a cos(kx) + b sin(kx)` for
/// `f = cos(kx)`.
fn cos_particular(eps: f64, k: f64) -> (f64, f64) {
    let d = 1.0 + eps * eps * k * k;
    (eps / d, 1.0 / (k * d))
}

/// Exact solution at `x`.
pub fn exact_solution(p: &ProblemInstance, x: f64) -> Result<f64> {
    let eps = p.eps;
    if let Some(c) = p.closed {
        return Ok(match c {
            Closed::One => x - layer(eps, x),
            Closed::OneMinus2x => -x * x + (1.0 - 2.0 * eps) * x + 2.0 * eps * layer(eps, x),
            Closed::TwoX => x * x + 2.0 * eps * x - (1.0 + 2.0 * eps) * layer(eps, x),
            Closed::Cubic => -x * x * x + 1.5 * x * x - 0.5 * x,
            Closed::Cos { k } => {
                let (a, b) = cos_particular(eps, k);
                let up = |t: f64| a * libm::cos(k * t) + b * libm::sin(k * t);
                up(x) - a + (a - up(1.0)) * layer(eps, x)
            }
        });
    }
    if let Some((u, _)) = &p.custom_exact {
        return Ok(u(x));
    }
    green_solution(eps, &*p.f, x, GREEN_TOL)
}

/// Exact derivative at `x`.
pub fn exact_derivative(p: &ProblemInstance, x: f64) -> Result<f64> {
    let eps = p.eps;
    if let Some(c) = p.closed {
        return Ok(match c {
            Closed::One => 1.0 - layer_slope(eps, x),
            Closed::OneMinus2x => -2.0 * x + 1.0 - 2.0 * eps + 2.0 * eps * layer_slope(eps, x),
            Closed::TwoX => 2.0 * x + 2.0 * eps - (1.0 + 2.0 * eps) * layer_slope(eps, x),
            Closed::Cubic => -3.0 * x * x + 3.0 * x - 0.5,
            Closed::Cos { k } => {
                let (a, b) = cos_particular(eps, k);
                let up1 = a * libm::cos(k) + b * libm::sin(k);
                k * (-a * libm::sin(k * x) + b * libm::cos(k * x)) + (a - up1) * layer_slope(eps, x)
            }
        });
    }
    if let Some((_, du)) = &p.custom_exact {
        return Ok(du(x));
    }
    green_solution_dx(eps, &*p.f, x, GREEN_TOL)
}

/// One sampled inequality `lhs <= rhs`, reporting the worst sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Largest `lhs - rhs` seen (non-positive when the bound holds).
    pub worst_excess: f64,
    pub worst_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub checks: Vec<BoundCheck>,
    /// `false` when the zero-mean derivative bounds were skipped.
    pub derivative_bounds_checked: bool,
}

impl StabilityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    worst: f64,
    at: f64,
    ok: bool,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst: f64::NEG_INFINITY,
            at: 0.0,
            ok: true,
        }
    }

    fn record(&mut self, x: f64, lhs: f64, rhs: f64) {
        let excess = lhs - rhs;
        if !(lhs.is_finite() && rhs.is_finite()) {
            self.ok = false;
        }
        if excess > self.worst {
            self.worst = excess;
            self.at = x;
        }
        // rounding slack relative to the size of the compared quantities
        if excess > 1e-12 * (1.0 + libm::fabs(lhs).max(libm::fabs(rhs))) {
            self.ok = false;
        }
    }

    fn finish(self) -> BoundCheck {
        BoundCheck {
            name: self.name,
            holds: self.ok,
            worst_excess: self.worst,
            worst_x: self.at,
        }
    }
}

pub const BOUND_ABS_BY_U1: &str = "|u| <= ||f||_inf u1";
pub const BOUND_SANDWICH_U1: &str = "f_min u1 <= u <= f_max u1";
pub const BOUND_GREEN_DIAG: &str = "|u(x)| <= G(x,x) ||f||_L1";
pub const BOUND_SUP: &str = "||u||_inf <= G_inf ||f||_L1";
pub const BOUND_DU: &str = "|u'| <= ||f||_inf";
pub const BOUND_D2U: &str = "|u''| <= 2 ||f||_inf / eps";

/// Samples the pointwise stability bounds for the exact solution at
/// `samples + 1` equispaced points of `[0, 1]`.
///
/// The derivative bounds need a zero-mean `f`; set `require_derivative` to
/// turn their absence into an error instead of a skip.
pub fn stability_bounds(
    p: &ProblemInstance,
    samples: usize,
    require_derivative: bool,
) -> Result<StabilityReport> {
    let eps = p.eps;
    let zero_mean = libm::fabs(p.fbar) <= 1e-12;
    if require_derivative && !zero_mean {
        return Err(Error::Precondition("derivative bounds need int f = 0"));
    }
    let samples = samples.max(200);
    let (fmin, fmax, fsup) = p.f_range();
    let fl1 = p.f_l1()?;
    let ginf = green_sup(eps)?;

    let mut abs_u1 = Tracker::new(BOUND_ABS_BY_U1);
    let mut sandwich = Tracker::new(BOUND_SANDWICH_U1);
    let mut diag = Tracker::new(BOUND_GREEN_DIAG);
    let mut sup = Tracker::new(BOUND_SUP);
    let mut du = Tracker::new(BOUND_DU);
    let mut d2u = Tracker::new(BOUND_D2U);
    let mut umax: f64 = 0.0;

    for k in 0..=samples {
        let x = k as f64 / samples as f64;
        let u = p.exact_u(x)?;
        let u1 = u1_closed(eps, x)?;
        umax = umax.max(libm::fabs(u));
        abs_u1.record(x, libm::fabs(u), fsup * u1);
        sandwich.record(x, fmin * u1, u);
        sandwich.record(x, u, fmax * u1);
        diag.record(x, libm::fabs(u), green_diagonal(eps, x)? * fl1);
        if zero_mean {
            du.record(x, libm::fabs(p.exact_du(x)?), fsup);
            d2u.record(x, libm::fabs(second_derivative_fd(p, x)?), 2.0 * fsup / eps);
        }
    }
    sup.record(0.0, umax, ginf * fl1);

    let mut checks = alloc::vec![
        abs_u1.finish(),
        sandwich.finish(),
        diag.finish(),
        sup.finish()
    ];
    if zero_mean {
        checks.push(du.finish());
        checks.push(d2u.finish());
    }
    Ok(StabilityReport {
        checks,
        derivative_bounds_checked: zero_mean,
    })
}

/// Second-order finite difference of the exact derivative, one-sided at the
/// ends of the interval.
fn second_derivative_fd(p: &ProblemInstance, x: f64) -> Result<f64> {
    let d = 1e-3 * p.eps.min(1e-2);
    let du = |t: f64| p.exact_du(t);
    if x - d < 0.0 {
        Ok((-3.0 * du(x)? + 4.0 * du(x + d)? - du(x + 2.0 * d)?) / (2.0 * d))
    } else if x + d > 1.0 {
        Ok((3.0 * du(x)? - 4.0 * du(x - d)? + du(x - 2.0 * d)?) / (2.0 * d))
    } else {
        Ok((du(x + d)? - du(x - d)?) / (2.0 * d))
    }
}
