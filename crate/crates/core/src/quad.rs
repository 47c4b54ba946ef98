//! Gauss-Legendre rules, graded partitions and adaptive integration.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `points`-point rule by Newton iteration on the Legendre
    /// polynomial. Exact for polynomials of degree `2 * points - 1`.
    pub fn new(points: usize) -> Self {
        let points = points.max(1);
        let mut nodes = alloc::vec![0.0; points];
        let mut weights = alloc::vec![0.0; points];
        let m = points.div_ceil(2);
        let nf = points as f64;
        for i in 0..m {
            // Tricomi initial guess
            let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(points, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if libm::fabs(dz) <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(points, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[points - 1 - i] = z;
            weights[i] = w;
            weights[points - 1 - i] = w;
        }
        if points % 2 == 1 {
            nodes[m - 1] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    /// Quadrature points and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Value and derivative of the Legendre polynomial of degree `n` at `z`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Break points of `[a, b]` refined geometrically (ratio 1/2) towards the
/// endpoint `b` until the last piece is no wider than `min_width`.
pub fn geometric_toward_right(a: f64, b: f64, min_width: f64) -> Vec<f64> {
    let mut pts = alloc::vec![a];
    if b <= a {
        return pts;
    }
    let min_width = min_width.max((b - a) * 1e-300).max(f64::MIN_POSITIVE);
    let mut d = b - a;
    while d > min_width {
        d *= 0.5;
        pts.push(b - d);
    }
    pts.push(b);
    pts
}

/// Mirror of [`geometric_toward_right`]: refinement accumulates at `a`.
pub fn geometric_toward_left(a: f64, b: f64, min_width: f64) -> Vec<f64> {
    let mut pts = alloc::vec![a];
    if b <= a {
        return pts;
    }
    let min_width = min_width.max(f64::MIN_POSITIVE);
    let mut widths = Vec::new();
    let mut d = b - a;
    while d > min_width {
        d *= 0.5;
        widths.push(d);
    }
    for w in widths.iter().rev() {
        pts.push(a + w);
    }
    pts.push(b);
    pts
}

/// Relative size of the quadrature roundoff floor.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Adaptive bisection with a fixed Gauss rule on each piece.
///
/// The integral over each starting piece `[breaks[k], breaks[k+1]]` is
/// refined until the difference between the one-piece and two-half estimates
/// drops below its share of `tol`.
#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub tol: f64,
    pub max_depth: u32,
}

impl Adaptive {
    pub fn new(tol: f64) -> Self {
        Self {
            rule: GaussLegendre::new(10),
            tol,
            max_depth: 40,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, breaks: &[f64], f: &F) -> Result<f64> {
        if breaks.len() < 2 {
            return Ok(0.0);
        }
        let total = breaks[breaks.len() - 1] - breaks[0];
        if total <= 0.0 {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut mag = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let share = self.tol * (b - a) / total;
            let whole = self.rule.integrate(a, b, f);
            let (v, e, m) = self.refine(a, b, whole, share, 0, f);
            sum += v;
            err += e;
            mag += m;
        }
        if !sum.is_finite() {
            return Err(Error::NonFinite("adaptive quadrature"));
        }
        if err > self.tol + ROUNDOFF * mag {
            return Err(Error::Accuracy {
                estimate: err,
                tolerance: self.tol,
            });
        }
        Ok(sum)
    }

    fn refine<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        f: &F,
    ) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(a, m, f);
        let right = self.rule.integrate(m, b, f);
        let est = libm::fabs(left + right - whole);
        let mag = libm::fabs(left) + libm::fabs(right);
        // below the roundoff floor further bisection cannot help
        if est <= tol || est <= ROUNDOFF * mag || depth >= self.max_depth || m <= a || m >= b {
            return (left + right, est, mag);
        }
        let (l, el, ml) = self.refine(a, m, left, 0.5 * tol, depth + 1, f);
        let (r, er, mr) = self.refine(m, b, right, 0.5 * tol, depth + 1, f);
        (l + r, el + er, ml + mr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for n in 1..=10 {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn five_point_nodes() {
        let rule = GaussLegendre::new(5);
        let expected = 0.906_179_845_938_664;
        assert!((rule.nodes[4] - expected).abs() < 1e-14);
        assert_eq!(rule.nodes[2], 0.0);
    }

    #[test]
    fn graded_breaks_reach_min_width() {
        let pts = geometric_toward_right(0.5, 1.0, 1e-6);
        assert_eq!(pts[0], 0.5);
        assert_eq!(*pts.last().unwrap(), 1.0);
        let last = pts[pts.len() - 1] - pts[pts.len() - 2];
        assert!(last <= 1e-6);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        let left = geometric_toward_left(0.0, 1.0, 1e-3);
        assert!(left[1] - left[0] <= 1e-3);
        assert!(left.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn adaptive_resolves_thin_layer() {
        let eps = 1e-6;
        let breaks = geometric_toward_right(0.0, 1.0, eps / 4.0);
        let q = Adaptive::new(1e-13);
        // integral of exp((x-1)/eps)/eps over [0,1] equals 1 - exp(-1/eps)
        let got = q
            .integrate(&breaks, &|x: f64| ((x - 1.0) / eps).exp() / eps)
            .unwrap();
        assert!((got - 1.0).abs() < 1e-11);
    }
}
