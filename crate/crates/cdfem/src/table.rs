//! Convergence tables and their CSV renderings.

use std::fmt::Write as _;

use cdfem_core::norms::convergence_order;
use cdfem_core::{Method, Norm};

/// One error column: a norm measured for one method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub norm: Norm,
    pub method: Method,
}

impl Column {
    pub fn label(&self) -> String {
        format!("{}_{}", self.norm.name(), self.method.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    /// One entry per column; `None` where the solve failed.
    pub errors: Vec<Option<f64>>,
}

/// A solve that failed while building a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub level: usize,
    pub method: Method,
    pub message: String,
}

/// Errors per level for one diffusion value. Orders are always derived from
/// the error columns on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct TableArtifact {
    pub caption: String,
    pub eps: f64,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

impl TableArtifact {
    pub fn column_index(&self, norm: Norm, method: Method) -> Option<usize> {
        self.columns.iter().position(|c| c.norm == norm && c.method == method)
    }

    /// Errors of one column, top to bottom.
    pub fn errors(&self, norm: Norm, method: Method) -> Vec<Option<f64>> {
        match self.column_index(norm, method) {
            Some(c) => self.rows.iter().map(|r| r.errors[c]).collect(),
            None => Vec::new(),
        }
    }

    /// Observed orders of column `c`; the first level gets 0 and entries next
    /// to a missing or zero error are `None`.
    pub fn orders_of(&self, c: usize) -> Vec<Option<f64>> {
        let errs: Vec<Option<f64>> = self.rows.iter().map(|r| r.errors[c]).collect();
        let mut out = Vec::with_capacity(errs.len());
        for (i, e) in errs.iter().enumerate() {
            if i == 0 {
                out.push(e.map(|_| 0.0));
                continue;
            }
            let o = match (errs[i - 1], *e) {
                (Some(a), Some(b)) => convergence_order(&[a, b]).ok().map(|o| o[1]),
                _ => None,
            };
            out.push(o);
        }
        out
    }

    pub fn orders(&self, norm: Norm, method: Method) -> Vec<Option<f64>> {
        match self.column_index(norm, method) {
            Some(c) => self.orders_of(c),
            None => Vec::new(),
        }
    }

    fn render(&self, fmt_err: impl Fn(f64) -> String, fmt_order: impl Fn(f64) -> String) -> String {
        let mut s = String::from("level,h");
        for c in &self.columns {
            let _ = write!(s, ",{}", c.label());
        }
        for c in &self.columns {
            let _ = write!(s, ",order_{}", c.label());
        }
        s.push('\n');
        let orders: Vec<Vec<Option<f64>>> = (0..self.columns.len()).map(|c| self.orders_of(c)).collect();
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "{},{}", r.level, fmt_err(r.h));
            for e in &r.errors {
                s.push(',');
                if let Some(e) = e {
                    s.push_str(&fmt_err(*e));
                }
            }
            for col in &orders {
                s.push(',');
                if let Some(o) = col[i] {
                    s.push_str(&fmt_order(o));
                }
            }
            s.push('\n');
        }
        s
    }

    /// Three significant digits, as in the reference results.
    pub fn to_csv(&self) -> String {
        self.render(|v| sci(v, 2), |o| format!("{o:.2}"))
    }

    /// Shortest round-trip representation of every value.
    pub fn to_full_csv(&self) -> String {
        self.render(|v| format!("{v:e}"), |o| format!("{o:e}"))
    }

    /// Fixed-width text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} (eps = {:e})\n", self.caption, self.eps);
        let _ = write!(s, "{:>5} {:>6}", "level", "n");
        for c in &self.columns {
            let _ = write!(s, " {:>14} {:>6}", c.label(), "order");
        }
        s.push('\n');
        let orders: Vec<Vec<Option<f64>>> = (0..self.columns.len()).map(|c| self.orders_of(c)).collect();
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "{:>5} {:>6}", r.level, r.n);
            for (c, e) in r.errors.iter().enumerate() {
                let e = e.map_or("-".to_string(), |v| sci(v, 2));
                let o = orders[c][i].map_or("-".to_string(), |v| format!("{v:.2}"));
                let _ = write!(s, " {e:>14} {o:>6}");
            }
            s.push('\n');
        }
        for f in &self.failures {
            let _ = writeln!(s, "level {} {}: {}", f.level, f.method, f.message);
        }
        s
    }
}

/// C-style `%.{digits}e`: mantissa with `digits` decimals, signed exponent
/// of at least two digits (`1.27e-05`).
pub fn sci(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.digits$e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(1.27e-5, 2), "1.27e-05");
        assert_eq!(sci(0.289, 2), "2.89e-01");
        assert_eq!(sci(1234.0, 2), "1.23e+03");
        assert_eq!(sci(0.0, 2), "0.00e+00");
        assert_eq!(sci(-5e-120, 1), "-5.0e-120");
    }

    fn table() -> TableArtifact {
        TableArtifact {
            caption: "t".into(),
            eps: 1e-6,
            columns: vec![Column {
                norm: Norm::L2,
                method: Method::Linear,
            }],
            rows: [4.0, 1.0, 0.25]
                .iter()
                .enumerate()
                .map(|(i, &e)| Row {
                    level: i + 1,
                    n: 4 << i,
                    h: 0.25 / (1 << i) as f64,
                    errors: vec![Some(e)],
                })
                .collect(),
            failures: vec![],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = table().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("level,h,l2_linear,order_l2_linear"));
        assert_eq!(lines.next(), Some("1,2.50e-01,4.00e+00,0.00"));
        assert_eq!(lines.next(), Some("2,1.25e-01,1.00e+00,2.00"));
    }

    #[test]
    fn orders_skip_missing_entries() {
        let mut t = table();
        t.rows[1].errors[0] = None;
        assert_eq!(t.orders(Norm::L2, Method::Linear), [Some(0.0), None, None]);
        assert!(t.to_csv().lines().nth(2).unwrap().ends_with(",,"));
    }
}
