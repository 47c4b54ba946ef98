use cdfem_core::assembly::Assembler;
use cdfem_core::linsolve::{discrete_inf_sup, solve_saddle, DiscreteSolution};
use cdfem_core::mesh::build_mesh;
use cdfem_core::norms::{interpolant_bounds_check, problem_error_norms, ErrorOptions};
use cdfem_core::quad::GaussLegendre;
use cdfem_core::{ProblemInstance, RhsKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sup_v b(u, v) / |v|_1` equals `sqrt(u^T B A^{-1} B^T u)`; the ratio to
/// `||u||` must lie between the computed constants for every `u`.
#[test]
fn random_rayleigh_quotients_lie_between_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, eps) in [(8, 1e-2), (16, 1e-4), (32, 1.0)] {
        let mesh = build_mesh(n).unwrap();
        let sys = Assembler::new(mesh, eps).unwrap().spls(&|_| 1.0).unwrap();
        let blocks = sys.saddle.as_ref().unwrap();
        let c = discrete_inf_sup(blocks, &mesh).unwrap();
        let chol = blocks.a.cholesky().unwrap();
        let h = mesh.h();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for _ in 0..500 {
            let u: Vec<f64> = (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bt = blocks.b.apply_transpose(&u);
            let num: f64 = bt.iter().zip(chol.solve(&bt)).map(|(a, b)| a * b).sum();
            let mass: f64 = (0..n - 1)
                .map(|i| {
                    let mut s = 2.0 * h / 3.0 * u[i];
                    if i > 0 {
                        s += h / 6.0 * u[i - 1];
                    }
                    if i + 2 < n {
                        s += h / 6.0 * u[i + 1];
                    }
                    s * u[i]
                })
                .sum();
            let r = (num / mass).sqrt();
            lo = lo.min(r);
            hi = hi.max(r);
        }
        assert!(c.lower <= lo * (1.0 + 1e-10), "n={n}: {} > {lo}", c.lower);
        assert!(hi <= c.upper * (1.0 + 1e-10), "n={n}: {hi} > {}", c.upper);
        assert!(c.lower > 0.0);
    }
}

fn seminorm(w: &DiscreteSolution) -> f64 {
    let rule = GaussLegendre::new(4);
    let mesh = *w.mesh();
    (1..=mesh.n())
        .map(|i| {
            let (a, b) = mesh.element(i);
            rule.integrate(a, b, |x| w.eval_on_element(i, x).1.powi(2))
        })
        .sum::<f64>()
        .sqrt()
}

#[test]
fn error_sandwich() {
    for eps in [1e-2, 1e-4] {
        for n in [8, 16, 32] {
            let p = ProblemInstance::new(eps, RhsKind::OneMinus2x).unwrap();
            let mesh = build_mesh(n).unwrap();
            let sys = Assembler::new(mesh, eps).unwrap().spls(&|x| p.f(x)).unwrap();
            let sol = solve_saddle(&sys).unwrap();
            let c = discrete_inf_sup(sys.saddle.as_ref().unwrap(), &mesh).unwrap();
            let err = problem_error_norms(&p, &sol.u, &ErrorOptions::default()).unwrap().l2;
            let interp = interpolant_bounds_check(&p, &mesh).unwrap().l2_error;
            let lower = seminorm(&sol.w) / c.upper;
            let upper = c.upper / c.lower * interp;
            assert!(lower <= err, "eps={eps} n={n}: {lower} > {err}");
            assert!(err <= upper, "eps={eps} n={n}: {err} > {upper}");
        }
    }
}
