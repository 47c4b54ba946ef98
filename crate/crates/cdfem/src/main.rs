use std::path::PathBuf;
use std::process::ExitCode;

use cdfem::config::{parse_levels, parse_method, parse_norm, parse_rhs};
use cdfem::experiments::{infsup_csv, solve};
use cdfem::{
    emit_figure_data, run_convergence, run_infsup_probe, run_shifted_spls, write_tables, Error,
    ExperimentConfig, FigureConfig,
};
use cdfem_core::norms::{error_norms, ErrorOptions};
use cdfem_core::{Method, Norm, ProblemInstance, RhsKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cdfem", version, about = "1D convection-diffusion finite element experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and print nodal values and error norms.
    Solve(SolveArgs),
    /// Convergence table over mesh levels.
    Convergence(SweepArgs),
    /// Saddle point least squares table measured against u_h + fbar/2.
    Shifted(SweepArgs),
    /// Nodal and dense samples (CSV) plus an SVG plot for one solve.
    Figure(FigureArgs),
    /// Discrete inf-sup constants and the saddle point error sandwich.
    Infsup(InfSupArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value = "linear", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value = "one", value_parser = parse_rhs)]
    rhs: RhsKind,
    /// Streamline diffusion weight (default 2h/3).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 7)]
    quad_order: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Level range such as `1..6`.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<(usize, usize)>,
    /// Level `i` uses `n = 2^(i + offset)`.
    #[arg(long)]
    level_offset: Option<u32>,
    /// Explicit mesh sizes instead of levels.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    method: Option<Vec<Method>>,
    #[arg(long, value_parser = parse_rhs)]
    rhs: Option<RhsKind>,
    #[arg(long, value_delimiter = ',', value_parser = parse_norm)]
    norms: Option<Vec<Norm>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    quad_order: Option<usize>,
    /// Measure errors on [3h, 1-3h] only.
    #[arg(long)]
    restrict_interval: bool,
    #[arg(long)]
    name: Option<String>,
    /// Output directory for CSV files and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn resolve(self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
            cfg.sizes = None;
        }
        if let Some(v) = self.level_offset {
            cfg.level_offset = v;
        }
        if let Some(v) = self.n {
            cfg.sizes = Some(v);
        }
        if let Some(v) = self.method {
            cfg.methods = v;
        }
        if let Some(v) = self.rhs {
            cfg.rhs = v;
        }
        if let Some(v) = self.norms {
            cfg.norms = v;
        }
        if self.delta.is_some() {
            cfg.delta = self.delta;
        }
        if let Some(v) = self.quad_order {
            cfg.quad_order = v;
        }
        if self.restrict_interval {
            cfg.restrict_interval = true;
        }
        if let Some(v) = self.name {
            cfg.name = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 101)]
    n: usize,
    #[arg(long, default_value = "linear", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value = "one", value_parser = parse_rhs)]
    rhs: RhsKind,
    #[arg(long)]
    delta: Option<f64>,
    /// Dense sample count for the exact curves.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    no_svg: bool,
    #[arg(long, default_value = "figures")]
    out: PathBuf,
}

#[derive(Args)]
struct InfSupArgs {
    #[arg(long, value_delimiter = ',', default_value = "1e-2")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    n: Vec<usize>,
    #[arg(long, default_value = "one-minus-2x", value_parser = parse_rhs)]
    rhs: RhsKind,
    /// Also write `infsup.csv` into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Command::Solve(a) => {
            let problem = ProblemInstance::new(a.eps, a.rhs)?;
            let solved = solve(&problem, a.method, a.n, a.delta)?;
            let h = 1.0 / a.n as f64;
            let r = error_norms(
                &|x| problem.exact_u(x),
                &|x| problem.exact_du(x),
                &solved.u,
                a.eps,
                a.delta.unwrap_or(2.0 * h / 3.0),
                &ErrorOptions {
                    quad_points: a.quad_order,
                    ..Default::default()
                },
            )?;
            println!(
                "# {} f={} n={} eps={:e}: l2={:e} h1={:e} sd={:e} balanced={:e}",
                a.method, a.rhs, a.n, a.eps, r.l2, r.h1_semi, r.sd, r.balanced
            );
            println!("x,u_h");
            for (x, u) in solved.u.mesh().nodes().zip(solved.u.nodal_values()) {
                println!("{x:e},{u:e}");
            }
        }
        Command::Convergence(a) => {
            let cfg = a.resolve()?;
            sweep(&cfg, run_convergence(&cfg)?)?;
        }
        Command::Shifted(a) => {
            let mut cfg = a.resolve()?;
            if cfg.name == "convergence" {
                cfg.name = "shifted".into();
            }
            cfg.methods = vec![Method::SPLS];
            cfg.shift = true;
            sweep(&cfg, run_shifted_spls(&cfg)?)?;
        }
        Command::Figure(a) => {
            let fig = FigureConfig {
                delta: a.delta,
                samples: a.samples,
                out: Some(a.out),
                svg: !a.no_svg,
                ..FigureConfig::new(a.method, a.eps, a.n, a.rhs)
            };
            let data = emit_figure_data(&fig)?;
            for p in data.files {
                println!("{}", p.display());
            }
        }
        Command::Infsup(a) => {
            let rows = run_infsup_probe(&a.eps, &a.n, a.rhs)?;
            let csv = infsup_csv(&rows);
            print!("{csv}");
            if let Some(dir) = a.out {
                std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                let p = dir.join("infsup.csv");
                std::fs::write(&p, csv).map_err(|source| Error::Io { path: p.clone(), source })?;
            }
        }
    }
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, tables: Vec<cdfem::TableArtifact>) -> Result<(), Error> {
    for t in &tables {
        println!("{}", t.to_text());
    }
    for p in write_tables(cfg, &tables)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
