use cdfem_core::assembly::Assembler;
use cdfem_core::exact::{green_kernel, green_sup, layer, layer_slope, u1_closed};
use cdfem_core::linsolve::{solve_reduced_decoupled, DiscreteSolution, Space};
use cdfem_core::mesh::{build_mesh, eval_basis, BasisId, Deriv, UniformMesh};
use cdfem_core::norms::convergence_order;
use cdfem_core::quad::GaussLegendre;
use cdfem_core::{ProblemInstance, RhsKind};
use proptest::prelude::*;

/// `int_0^1 f` with a 6-point rule per element (exact for the piecewise
/// polynomials below).
fn integrate(mesh: &UniformMesh, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(6);
    (1..=mesh.n())
        .map(|i| {
            let (a, b) = mesh.element(i);
            rule.integrate(a, b, &f)
        })
        .sum()
}

/// `w_h + sum_j w_j (B_j - B_{j+1})` and its derivative.
fn enriched(mesh: &UniformMesh, w: &[f64], x: f64, deriv: Deriv) -> f64 {
    (1..mesh.n())
        .map(|j| w[j - 1] * eval_basis(mesh, BasisId::pg(j), x, deriv).unwrap())
        .sum()
}

fn coefficients(max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (2..max_n).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(-10.0..10.0f64, n - 1),
            prop::collection::vec(-10.0..10.0f64, n - 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn enriched_seminorm_is_19_thirds((n, w, _) in coefficients(40)) {
        let mesh = build_mesh(n).unwrap();
        let wh = DiscreteSolution::new(mesh, Space::P1, None, w.clone());
        let lhs = integrate(&mesh, |x| enriched(&mesh, &w, x, Deriv::First).powi(2));
        let rhs = integrate(&mesh, |x| wh.eval_derivative(x).powi(2));
        prop_assert!((lhs - 19.0 / 3.0 * rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
    }

    #[test]
    fn bubbles_create_diffusion((n, u, w) in coefficients(40), eps in 1e-10..1.0f64) {
        let mesh = build_mesh(n).unwrap();
        let h = mesh.h();
        let uh = DiscreteSolution::new(mesh, Space::P1, None, u);
        let wh = DiscreteSolution::new(mesh, Space::P1, None, w.clone());
        let b = integrate(&mesh, |x| {
            eps * uh.eval_derivative(x) * enriched(&mesh, &w, x, Deriv::First)
                + uh.eval_derivative(x) * enriched(&mesh, &w, x, Deriv::Value)
        });
        let want = integrate(&mesh, |x| {
            (eps + 2.0 * h / 3.0) * uh.eval_derivative(x) * wh.eval_derivative(x)
                + uh.eval_derivative(x) * wh.eval(x)
        });
        let scale = integrate(&mesh, |x| uh.eval_derivative(x).abs() * wh.eval_derivative(x).abs());
        prop_assert!((b - want).abs() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn pg_and_sd_matrices_coincide(n in 2usize..200, eps in 0.0..1.0f64) {
        let asm = Assembler::new(build_mesh(n).unwrap(), eps).unwrap();
        let pg = asm.pg(&|x: f64| 2.0 * x).unwrap();
        let sd = asm.sd(asm.default_delta(), &|x: f64| 2.0 * x).unwrap();
        for i in 0..n - 1 {
            for j in pg.matrix.row_span(i) {
                prop_assert!((pg.matrix.get(i, j) - sd.matrix.get(i, j)).abs() <= 1e-13 * (1.0 + eps * n as f64));
            }
        }
    }

    #[test]
    fn constant_load_is_method_independent(n in 2usize..200, eps in 1e-10..1.0f64, c in -5.0..5.0f64) {
        let asm = Assembler::new(build_mesh(n).unwrap(), eps).unwrap();
        let pg = asm.pg(&|_| c).unwrap();
        let sd = asm.sd(asm.default_delta(), &|_| c).unwrap();
        for (a, b) in pg.rhs.iter().zip(&sd.rhs) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn theta_is_w_minus_mean(x in 0.0..=1.0f64, k in 0usize..6, eps in 1e-8..1.0f64) {
        let p = ProblemInstance::new(eps, RhsKind::TAGGED[k]).unwrap();
        let lhs = p.reduced_theta(x).unwrap();
        let rhs = p.reduced_w(x).unwrap() - p.fbar();
        prop_assert!((lhs - rhs).abs() <= 1e-13);
    }

    #[test]
    fn kernel_bounded_and_unimodal(eps_exp in -3.0..-1.0f64, i in 1usize..100) {
        let eps = 10f64.powf(eps_exp);
        let x = i as f64 / 100.0;
        let ginf = green_sup(eps).unwrap();
        // strictly below one, but rounds to 1.0 once eps <~ 1e-2
        prop_assert!(ginf <= 1.0);
        prop_assert!(eps > 2e-2 || 1.0 - ginf < 1e-10);
        let mut prev = 0.0;
        for k in 0..=100 {
            let s = k as f64 / 100.0;
            let g = green_kernel(eps, x, s).unwrap();
            prop_assert!(g >= 0.0 && g <= ginf + 1e-15);
            if s <= x {
                prop_assert!(g >= prev - 1e-15);
            } else {
                prop_assert!(g <= prev + 1e-15);
            }
            prev = g;
        }
    }

    #[test]
    fn orders_invert_geometric_sequences(e0 in 1e-8..1.0f64, rates in prop::collection::vec(0.25..4.0f64, 1..8)) {
        let mut errs = vec![e0];
        for r in &rates {
            let last = *errs.last().unwrap();
            errs.push(last * 2f64.powf(-r));
        }
        let o = convergence_order(&errs).unwrap();
        prop_assert_eq!(o[0], 0.0);
        for (got, want) in o[1..].iter().zip(&rates) {
            prop_assert!((got - want).abs() < 1e-10);
        }
    }
}

#[test]
fn kernel_supremum_below_one() {
    assert!(green_sup(0.1).unwrap() < 1.0);
    assert!(green_sup(0.05).unwrap() < 1.0);
}

#[test]
fn partition_of_unity_on_interior() {
    let mesh = build_mesh(13).unwrap();
    for k in 0..=1000 {
        let x = k as f64 / 1000.0;
        let s: f64 = (1..13)
            .map(|j| eval_basis(&mesh, BasisId::p1(j), x, Deriv::Value).unwrap())
            .sum();
        if (mesh.node(1)..=mesh.node(12)).contains(&x) {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn reduced_odd_solution_for_unit_load() {
    // even nodes interpolate x, odd nodes interpolate x - 1
    for m in [1usize, 2, 5, 50] {
        let n = 2 * m + 1;
        let mesh = build_mesh(n).unwrap();
        let sys = Assembler::new(mesh, 0.0).unwrap().standard(&|_| 1.0).unwrap();
        let u = solve_reduced_decoupled(&mesh, &sys.rhs).unwrap();
        for j in 1..n {
            let x = mesh.node(j);
            let want = if j % 2 == 0 { x } else { x - 1.0 };
            assert!((u.coefficients()[j - 1] - want).abs() < 1e-13, "n={n} j={j}");
        }
    }
}

#[test]
fn closed_forms_agree_with_green_quadrature() {
    for eps in [1e-1, 1e-3] {
        for tag in RhsKind::TAGGED {
            let p = ProblemInstance::new(eps, tag).unwrap();
            let f = p.rhs();
            let custom = ProblemInstance::custom(eps, f, None).unwrap();
            assert!((custom.fbar() - p.fbar()).abs() < 1e-12, "{tag}");
            for k in 1..=50 {
                let x = k as f64 / 51.0;
                let a = p.exact_u(x).unwrap();
                let b = custom.exact_u(x).unwrap();
                assert!((a - b).abs() < 1e-8, "{tag} eps={eps} x={x}: {a} vs {b}");
            }
            let x = 0.5;
            assert!((u1_closed(eps, x).unwrap() - x + layer(eps, x)).abs() < 1e-15);
        }
    }
}

#[test]
fn closed_forms_solve_the_equation() {
    for eps in [1e-1, 1e-2, 1e-4, 1e-8] {
        for tag in RhsKind::TAGGED {
            let p = ProblemInstance::new(eps, tag).unwrap();
            assert_eq!(p.exact_u(0.0).unwrap(), 0.0);
            assert!(p.exact_u(1.0).unwrap().abs() < 1e-14, "{tag}");
            for k in 0..100 {
                let x = (k as f64 + 0.5) / 100.0;
                let d2 = p.exact_d2u(x).unwrap();
                let r = -eps * d2 + p.exact_du(x).unwrap() - p.f(x);
                assert!(r.abs() < 1e-8, "{tag} eps={eps} x={x}: {r}");
            }
            // derivative against a difference quotient of the values
            let step = 1e-6;
            for x in [0.3, 0.7] {
                let fd = (p.exact_u(x + step).unwrap() - p.exact_u(x - step).unwrap()) / (2.0 * step);
                assert!((fd - p.exact_du(x).unwrap()).abs() < 1e-5, "{tag}");
            }
        }
    }
}

#[test]
fn layer_slope_matches_difference_quotient() {
    let eps = 1e-2;
    for x in [0.9, 0.99, 1.0 - 1e-3] {
        let d = 1e-7;
        let fd = (layer(eps, x + d) - layer(eps, x - d)) / (2.0 * d);
        assert!((fd - layer_slope(eps, x)).abs() < 1e-5 * layer_slope(eps, x));
    }
}

#[test]
fn evaluations_stay_finite_for_tiny_eps() {
    for eps in [1e-12, 1e-10, 1e-6, 1.0] {
        for tag in RhsKind::TAGGED {
            let p = ProblemInstance::new(eps, tag).unwrap();
            for k in 0..=10_000 {
                let x = k as f64 / 10_000.0;
                assert!(p.exact_u(x).unwrap().is_finite());
                assert!(p.exact_du(x).unwrap().is_finite());
                assert!(green_kernel(eps, x, 1.0 - x).unwrap().is_finite());
            }
        }
    }
}
