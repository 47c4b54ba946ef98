//! Convergence sweeps, figure data and inf-sup probes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cdfem_core::assembly::Assembler;
use cdfem_core::exact::ProblemInstance;
use cdfem_core::linsolve::{discrete_inf_sup, solve_saddle, solve_system, DiscreteSolution};
use cdfem_core::norms::{error_norms, interpolant_bounds_check, ErrorOptions, ErrorReport};
use cdfem_core::quad::GaussLegendre;
use cdfem_core::{build_mesh, Method, RhsKind};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{io_err, Error, Result};
use crate::svg::{line_chart, Series};
use crate::table::{Column, Failure, Row, TableArtifact};

/// Result of one discretization on one mesh.
#[derive(Debug, Clone)]
pub struct Solved {
    pub u: DiscreteSolution,
    /// Auxiliary test-space component of saddle point methods.
    pub w: Option<DiscreteSolution>,
}

/// Assembles and solves `method` on `n` subintervals.
pub fn solve(problem: &ProblemInstance, method: Method, n: usize, delta: Option<f64>) -> Result<Solved> {
    let asm = Assembler::new(build_mesh(n)?, problem.epsilon())?;
    let f = problem.rhs();
    let sys = asm.assemble(method, &*f, delta)?;
    if sys.saddle.is_some() {
        let s = solve_saddle(&sys)?;
        Ok(Solved { u: s.u, w: Some(s.w) })
    } else {
        Ok(Solved {
            u: solve_system(&sys)?,
            w: None,
        })
    }
}

/// Error options for one cell of a sweep.
fn cell_options(cfg: &ExperimentConfig, problem: &ProblemInstance, method: Method, level: usize, h: f64) -> ErrorOptions {
    ErrorOptions {
        quad_points: cfg.quad_order,
        shift: if cfg.shift && method.is_saddle() {
            0.5 * problem.fbar()
        } else {
            0.0
        },
        interval: cfg.restrict_interval.then_some((3.0 * h, 1.0 - 3.0 * h)),
        grade_layer: true,
        level,
    }
}

fn measure(cfg: &ExperimentConfig, problem: &ProblemInstance, method: Method, level: usize, n: usize) -> Result<ErrorReport> {
    let solved = solve(problem, method, n, cfg.delta)?;
    let h = 1.0 / n as f64;
    let delta = cfg.delta.unwrap_or(2.0 * h / 3.0);
    let opts = cell_options(cfg, problem, method, level, h);
    Ok(error_norms(
        &|x| problem.exact_u(x),
        &|x| problem.exact_du(x),
        &solved.u,
        problem.epsilon(),
        delta,
        &opts,
    )?)
}

/// Checks that the bubble up-winded and streamline diffusion matrices agree,
/// which holds whenever `delta = 2h/3`.
pub fn check_pg_sd_matrices(problem: &ProblemInstance, level: usize, n: usize) -> Result<()> {
    let asm = Assembler::new(build_mesh(n)?, problem.epsilon())?;
    let f = problem.rhs();
    let pg = asm.pg(&*f)?;
    let sd = asm.sd(asm.default_delta(), &*f)?;
    for i in 0..pg.matrix.dim() {
        for j in pg.matrix.row_span(i) {
            let (a, b) = (pg.matrix.get(i, j), sd.matrix.get(i, j));
            if (a - b).abs() > 1e-13 * (1.0 + a.abs()) {
                return Err(Error::Invariant {
                    level,
                    detail: format!("entry ({i}, {j}): pg {a:e} vs sd {b:e}"),
                });
            }
        }
    }
    Ok(())
}

/// Runs every `(eps, level, method)` cell and gathers one table per `eps`.
///
/// Cells run in parallel; the output order depends only on the config.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<TableArtifact>> {
    cfg.validate()?;
    let grid = cfg.grid();
    let problems = cfg
        .eps
        .iter()
        .map(|&e| ProblemInstance::new(e, cfg.rhs))
        .collect::<cdfem_core::Result<Vec<_>>>()?;

    let both = cfg.methods.contains(&Method::PG) && cfg.methods.contains(&Method::SD);
    if both && cfg.delta.is_none() {
        for p in &problems {
            for &(level, n) in &grid {
                check_pg_sd_matrices(p, level, n)?;
            }
        }
    }

    let cells: Vec<(usize, usize, Method)> = (0..problems.len())
        .flat_map(|e| (0..grid.len()).flat_map(move |l| cfg.methods.iter().map(move |&m| (e, l, m))))
        .collect();
    let results: Vec<std::result::Result<ErrorReport, String>> = cells
        .par_iter()
        .map(|&(e, l, m)| {
            let (level, n) = grid[l];
            measure(cfg, &problems[e], m, level, n).map_err(|err| err.to_string())
        })
        .collect();

    let columns: Vec<Column> = cfg
        .methods
        .iter()
        .flat_map(|&method| cfg.norms.iter().map(move |&norm| Column { norm, method }))
        .collect();
    let mut tables = Vec::with_capacity(problems.len());
    let mut it = results.into_iter();
    for p in &problems {
        let mut rows = Vec::with_capacity(grid.len());
        let mut failures = Vec::new();
        for &(level, n) in &grid {
            let mut errors = vec![None; columns.len()];
            for &m in &cfg.methods {
                match it.next().expect("one result per cell") {
                    Ok(r) => {
                        for (c, col) in columns.iter().enumerate() {
                            if col.method == m {
                                errors[c] = Some(r.get(col.norm));
                            }
                        }
                    }
                    Err(message) => failures.push(Failure { level, method: m, message }),
                }
            }
            rows.push(Row {
                level,
                n,
                h: 1.0 / n as f64,
                errors,
            });
        }
        tables.push(TableArtifact {
            caption: caption(cfg),
            eps: p.epsilon(),
            columns: columns.clone(),
            rows,
            failures,
        });
    }
    Ok(tables)
}

fn caption(cfg: &ExperimentConfig) -> String {
    let methods: Vec<&str> = cfg.methods.iter().map(|m| m.name()).collect();
    let mut s = format!("{}: f = {}, methods {}", cfg.name, cfg.rhs, methods.join("/"));
    if cfg.shift {
        s.push_str(", shifted by fbar/2");
    }
    if cfg.restrict_interval {
        s.push_str(", on [3h, 1-3h]");
    }
    s
}

/// Saddle point least squares errors measured against `u_h + fbar/2`.
pub fn run_shifted_spls(cfg: &ExperimentConfig) -> Result<Vec<TableArtifact>> {
    let cfg = ExperimentConfig {
        methods: vec![Method::SPLS],
        shift: true,
        ..cfg.clone()
    };
    run_convergence(&cfg)
}

fn eps_tag(eps: f64) -> String {
    format!("{eps:e}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

/// Writes the short and full-precision CSV of every table plus the run
/// manifest into `cfg.out`; returns the written paths.
pub fn write_tables(cfg: &ExperimentConfig, tables: &[TableArtifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let mut paths = Vec::new();
    for t in tables {
        let stem = format!("{}_eps{}", cfg.name, eps_tag(t.eps));
        let short = cfg.out.join(format!("{stem}.csv"));
        let full = cfg.out.join(format!("{stem}.full.csv"));
        write(&short, &t.to_csv())?;
        write(&full, &t.to_full_csv())?;
        paths.push(short);
        paths.push(full);
    }
    let manifest = cfg.out.join(format!("{}.manifest", cfg.name));
    write(&manifest, &cfg.to_manifest())?;
    paths.push(manifest);
    Ok(paths)
}

/// Parameters of a single figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureConfig {
    pub method: Method,
    pub eps: f64,
    pub n: usize,
    pub rhs: RhsKind,
    pub delta: Option<f64>,
    /// Dense sample count for the exact curves.
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl FigureConfig {
    pub fn new(method: Method, eps: f64, n: usize, rhs: RhsKind) -> Self {
        Self {
            method,
            eps,
            n,
            rhs,
            delta: None,
            samples: 1000,
            out: None,
            svg: true,
        }
    }

    pub fn stem(&self) -> String {
        format!("fig_{}_{}_n{}_eps{}", self.method.name(), self.rhs.name(), self.n, eps_tag(self.eps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSample {
    pub x: f64,
    pub u_h: f64,
    pub u: f64,
    /// Forward reduced solution `int_0^x f`.
    pub w: f64,
    /// Backward reduced solution `-int_x^1 f`.
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct FigureData {
    /// `(x_j, u_h(x_j))` for all nodes including the boundary.
    pub nodes: Vec<(f64, f64)>,
    pub dense: Vec<DenseSample>,
    pub files: Vec<PathBuf>,
}

/// Solves once and samples the discrete, exact and reduced solutions.
pub fn emit_figure_data(fig: &FigureConfig) -> Result<FigureData> {
    let problem = ProblemInstance::new(fig.eps, fig.rhs)?;
    let solved = solve(&problem, fig.method, fig.n, fig.delta)?;
    let mesh = *solved.u.mesh();
    let nodes: Vec<(f64, f64)> = mesh.nodes().zip(solved.u.nodal_values()).collect();
    let m = fig.samples.max(2);
    let dense = (0..=m)
        .map(|k| {
            let x = k as f64 / m as f64;
            Ok(DenseSample {
                x,
                u_h: solved.u.eval(x),
                u: problem.exact_u(x)?,
                w: problem.reduced_w(x)?,
                theta: problem.reduced_theta(x)?,
            })
        })
        .collect::<cdfem_core::Result<Vec<_>>>()?;

    let mut files = Vec::new();
    if let Some(dir) = &fig.out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let stem = fig.stem();
        let mut s = String::from("x,u_h\n");
        for (x, u) in &nodes {
            let _ = writeln!(s, "{x:e},{u:e}");
        }
        let p = dir.join(format!("{stem}.nodes.csv"));
        write(&p, &s)?;
        files.push(p);

        let mut s = String::from("x,u_h,u,w,theta\n");
        for d in &dense {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", d.x, d.u_h, d.u, d.w, d.theta);
        }
        let p = dir.join(format!("{stem}.dense.csv"));
        write(&p, &s)?;
        files.push(p);

        if fig.svg {
            let exact: Vec<(f64, f64)> = dense.iter().map(|d| (d.x, d.u)).collect();
            let title = format!(
                "{} f={} n={} eps={:e}",
                fig.method.name(),
                fig.rhs.name(),
                fig.n,
                fig.eps
            );
            let svg = line_chart(
                &title,
                &[
                    Series { label: "u_h (nodes)", points: &nodes, markers: true },
                    Series { label: "u", points: &exact, markers: false },
                ],
            );
            let p = dir.join(format!("{stem}.svg"));
            write(&p, &svg)?;
            files.push(p);
        }
    }
    Ok(FigureData { nodes, dense, files })
}

/// One row of the inf-sup probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupRow {
    pub n: usize,
    pub eps: f64,
    pub m_h: f64,
    pub big_m_h: f64,
    /// `|w_h|_1`
    pub w_semi: f64,
    /// `||u - u_h||`
    pub error: f64,
    /// `||u - I_h u||`
    pub interp_error: f64,
}

impl InfSupRow {
    pub fn lower_bound(&self) -> f64 {
        self.w_semi / self.big_m_h
    }

    pub fn upper_bound(&self) -> f64 {
        self.big_m_h / self.m_h * self.interp_error
    }

    /// Both sides of the error sandwich.
    pub fn holds(&self) -> bool {
        self.lower_bound() <= self.error && self.error <= self.upper_bound()
    }
}

fn h1_seminorm(w: &DiscreteSolution) -> f64 {
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

/// Discrete inf-sup constants and both sides of the saddle point error
/// sandwich for every `(eps, n)`.
pub fn run_infsup_probe(eps: &[f64], sizes: &[usize], rhs: RhsKind) -> Result<Vec<InfSupRow>> {
    let cells: Vec<(f64, usize)> = eps.iter().flat_map(|&e| sizes.iter().map(move |&n| (e, n))).collect();
    cells
        .par_iter()
        .map(|&(eps, n)| {
            let problem = ProblemInstance::new(eps, rhs)?;
            let mesh = build_mesh(n)?;
            let f = problem.rhs();
            let sys = Assembler::new(mesh, eps)?.spls(&*f)?;
            let sol = solve_saddle(&sys)?;
            let c = discrete_inf_sup(sys.saddle.as_ref().expect("saddle blocks"), &mesh)?;
            let error = error_norms(
                &|x| problem.exact_u(x),
                &|x| problem.exact_du(x),
                &sol.u,
                eps,
                0.0,
                &ErrorOptions::default(),
            )?
            .l2;
            Ok(InfSupRow {
                n,
                eps,
                m_h: c.lower,
                big_m_h: c.upper,
                w_semi: h1_seminorm(&sol.w),
                error,
                interp_error: interpolant_bounds_check(&problem, &mesh)?.l2_error,
            })
        })
        .collect()
}

pub fn infsup_csv(rows: &[InfSupRow]) -> String {
    let mut s = String::from("n,eps,m_h,M_h,w_semi,error,interp_error,lower,upper,holds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.n,
            r.eps,
            r.m_h,
            r.big_m_h,
            r.w_semi,
            r.error,
            r.interp_error,
            r.lower_bound(),
            r.upper_bound(),
            r.holds()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_has_expected_shape() {
        let cfg = ExperimentConfig {
            methods: vec![Method::Linear, Method::SPLS],
            levels: (1, 3),
            level_offset: 1,
            ..Default::default()
        };
        let t = run_convergence(&cfg).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].rows.len(), 3);
        assert_eq!(t[0].rows[0].n, 4);
        assert_eq!(t[0].columns.len(), 4);
        assert!(t[0].failures.is_empty());
        let e = t[0].errors(cdfem_core::Norm::H1Semi, Method::Linear);
        assert!((e[0].unwrap() - 0.2887).abs() < 1e-3);
    }

    #[test]
    fn zero_eps_is_rejected() {
        let cfg = ExperimentConfig {
            eps: vec![0.0],
            ..Default::default()
        };
        assert!(run_convergence(&cfg).is_err());
    }

    #[test]
    fn shift_vanishes_for_zero_mean_data() {
        let base = ExperimentConfig {
            methods: vec![Method::SPLS],
            levels: (1, 2),
            rhs: RhsKind::OneMinus2x,
            ..Default::default()
        };
        let a = run_convergence(&base).unwrap();
        let b = run_shifted_spls(&base).unwrap();
        assert_eq!(a[0].rows, b[0].rows);
    }

    #[test]
    fn figure_without_output_writes_nothing() {
        let fig = FigureConfig::new(Method::Linear, 1e-2, 8, RhsKind::One);
        let d = emit_figure_data(&fig).unwrap();
        assert_eq!(d.nodes.len(), 9);
        assert_eq!(d.nodes[0], (0.0, 0.0));
        assert!(d.files.is_empty());
        assert_eq!(d.dense.len(), 1001);
    }

    #[test]
    fn infsup_rows_satisfy_sandwich() {
        let rows = run_infsup_probe(&[1e-2], &[8, 16], RhsKind::OneMinus2x).unwrap();
        assert!(rows.iter().all(|r| r.m_h > 0.0 && r.holds()));
    }
}
