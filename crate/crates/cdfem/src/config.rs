//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # lines starting with '#' are comments; blank lines are ignored
//! name = linear_spls
//! methods = linear, spls        # linear | pg | sd | spls
//! eps = 1e-6, 1e-10
//! levels = 1..6                 # level i uses n = 2^(i + level_offset)
//! level_offset = 5
//! n = 32, 64                    # explicit sizes, overrides levels
//! rhs = one-minus-2x            # one | one-minus-2x | two-x | cos7 | cos1 | cubic
//! norms = h1, l2                # h1 | l2 | sd | balanced
//! shift = false                 # compare SPLS against u_h + fbar/2
//! restrict_interval = false     # measure on [3h, 1 - 3h] only
//! delta = 0.01                  # streamline weight, default 2h/3
//! quad_order = 7
//! out = results
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cdfem_core::{Method, Norm, RhsKind};

use crate::error::{io_err, Error, Result};

/// Default offset between level index and mesh exponent.
pub const DEFAULT_LEVEL_OFFSET: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub methods: Vec<Method>,
    pub eps: Vec<f64>,
    pub levels: (usize, usize),
    pub level_offset: u32,
    /// Explicit mesh sizes; when set, replaces `levels`.
    pub sizes: Option<Vec<usize>>,
    pub rhs: RhsKind,
    pub norms: Vec<Norm>,
    pub shift: bool,
    pub restrict_interval: bool,
    pub delta: Option<f64>,
    pub quad_order: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "convergence".into(),
            methods: vec![Method::Linear, Method::SPLS],
            eps: vec![1e-6],
            levels: (1, 6),
            level_offset: DEFAULT_LEVEL_OFFSET,
            sizes: None,
            rhs: RhsKind::OneMinus2x,
            norms: vec![Norm::H1Semi, Norm::L2],
            shift: false,
            restrict_interval: false,
            delta: None,
            quad_order: 7,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    /// `(level, n)` pairs of the sweep.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        match &self.sizes {
            Some(ns) => ns.iter().enumerate().map(|(i, &n)| (i + 1, n)).collect(),
            None => (self.levels.0..=self.levels.1)
                .map(|i| (i, 1usize << (i as u32 + self.level_offset)))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        if self.methods.is_empty() {
            return bad("no methods");
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("eps values must be positive");
        }
        if self.norms.is_empty() {
            return bad("no norms");
        }
        if self.sizes.is_none() && (self.levels.0 == 0 || self.levels.0 > self.levels.1) {
            return bad("levels must be a range a..b with 1 <= a <= b");
        }
        if self.sizes.is_none() && self.levels.1 as u32 + self.level_offset > 24 {
            return bad("finest level too large");
        }
        if self.grid().iter().any(|&(_, n)| n < 2) {
            return bad("mesh sizes must be at least 2");
        }
        if self.delta.is_some_and(|d| !(d >= 0.0)) {
            return bad("delta must be non-negative");
        }
        if self.quad_order == 0 {
            return bad("quad_order must be positive");
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// Parses the flat format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|msg| Error::Config { line: i + 1, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "name" => self.name = value.to_string(),
            "methods" | "method" => self.methods = parse_list(value, parse_method)?,
            "eps" => self.eps = parse_list(value, parse_f64)?,
            "levels" => self.levels = parse_levels(value)?,
            "level_offset" => self.level_offset = value.parse().map_err(|_| bad_value(key, value))?,
            "n" => self.sizes = Some(parse_list(value, |s| s.parse().map_err(|_| bad_value(key, s)))?),
            "rhs" => self.rhs = parse_rhs(value)?,
            "norms" => self.norms = parse_list(value, parse_norm)?,
            "shift" => self.shift = parse_bool(value)?,
            "restrict_interval" => self.restrict_interval = parse_bool(value)?,
            "delta" => self.delta = Some(parse_f64(value)?),
            "quad_order" => self.quad_order = value.parse().map_err(|_| bad_value(key, value))?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// The resolved configuration in the file format, for run manifests.
    pub fn to_manifest(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "methods = {}", join(self.methods.iter().map(|m| m.name().to_string()).collect()));
        let _ = writeln!(s, "eps = {}", join(self.eps.iter().map(|e| format!("{e:e}")).collect()));
        match &self.sizes {
            Some(ns) => {
                let _ = writeln!(s, "n = {}", join(ns.iter().map(|n| n.to_string()).collect()));
            }
            None => {
                let _ = writeln!(s, "levels = {}..{}", self.levels.0, self.levels.1);
                let _ = writeln!(s, "level_offset = {}", self.level_offset);
            }
        }
        let _ = writeln!(s, "rhs = {}", self.rhs.name());
        let _ = writeln!(s, "norms = {}", join(self.norms.iter().map(|n| n.name().to_string()).collect()));
        let _ = writeln!(s, "shift = {}", self.shift);
        let _ = writeln!(s, "restrict_interval = {}", self.restrict_interval);
        if let Some(d) = self.delta {
            let _ = writeln!(s, "delta = {d:e}");
        }
        let _ = writeln!(s, "quad_order = {}", self.quad_order);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }
}

fn bad_value(key: &str, value: &str) -> String {
    format!("bad value `{value}` for `{key}`")
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(f).collect()
}

pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("not a number: `{s}`"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("not a boolean: `{s}`")),
    }
}

/// Accepts `a..b`, `a-b` or a single level.
pub fn parse_levels(s: &str) -> std::result::Result<(usize, usize), String> {
    let err = || format!("bad level range `{s}`");
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .unwrap_or((s, s));
    let a = a.trim().parse().map_err(|_| err())?;
    let b = b.trim().trim_start_matches('=').parse().map_err(|_| err())?;
    Ok((a, b))
}

pub fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "linear" | "L" => Ok(Method::Linear),
        "pg" | "P" => Ok(Method::PG),
        "sd" | "D" => Ok(Method::SD),
        "spls" | "S" => Ok(Method::SPLS),
        _ => Err(format!("unknown method `{s}`")),
    }
}

pub fn parse_rhs(s: &str) -> std::result::Result<RhsKind, String> {
    RhsKind::from_name(s).ok_or_else(|| format!("unknown rhs `{s}`"))
}

pub fn parse_norm(s: &str) -> std::result::Result<Norm, String> {
    Norm::from_name(s).ok_or_else(|| format!("unknown norm `{s}`"))
}
