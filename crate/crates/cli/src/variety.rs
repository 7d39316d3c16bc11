//! Variety specifications and their expansion into local power series.

use std::path::Path;

use num_traits::Zero;
use okbody_core::scalar::parse_rat;
use okbody_core::series::{implicit_solve, parse_polynomial, Polynomial};
use okbody_core::{Error, QSeries, Rat};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::read_json;

/// The section `τ` that all sections are divided by, given in the affine chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSpec {
    pub name: String,
    #[serde(default = "one")]
    pub expr: String,
}

fn one() -> String {
    "1".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub id: String,
    /// Polynomial numerator in the affine variables.
    pub numerator: String,
}

/// An affine chart of a variety near a point, with a linear system.
///
/// The variables in `local` give local coordinates `u_i = x_i − p_i`; any
/// remaining variable is dependent and is solved for from the single
/// equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarietySpec {
    pub name: String,
    pub variables: Vec<String>,
    #[serde(default)]
    pub equations: Vec<String>,
    pub point: Vec<String>,
    pub local: Vec<String>,
    pub tau: TauSpec,
    pub sections: Vec<SectionSpec>,
    pub trunc: u32,
}

/// Expanded sections `f_j = η_j / τ` as series in the local coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBundle {
    pub variety: String,
    pub local: Vec<String>,
    pub trunc: u32,
    pub sections: Vec<BundleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleEntry {
    pub id: String,
    pub display: String,
    pub series: QSeries,
}

impl SeriesBundle {
    pub fn pairs(&self) -> Vec<(String, QSeries)> {
        self.sections
            .iter()
            .map(|e| (e.id.clone(), e.series.clone()))
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&QSeries> {
        self.sections.iter().find(|e| e.id == id).map(|e| &e.series)
    }
}

/// Names used for local coordinates when printing.
pub fn local_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["u".into()]
    } else {
        (1..=n).map(|i| format!("u{i}")).collect()
    }
}

impl VarietySpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// Local dimension `n`.
    pub fn n(&self) -> usize {
        self.local.len()
    }

    fn var_refs(&self) -> Vec<&str> {
        self.variables.iter().map(|s| s.as_str()).collect()
    }

    fn point_rat(&self) -> CliResult<Vec<Rat>> {
        if self.point.len() != self.variables.len() {
            return Err(Error::ArityMismatch {
                expected: self.variables.len(),
                found: self.point.len(),
            }
            .into());
        }
        Ok(self
            .point
            .iter()
            .map(|s| parse_rat(s))
            .collect::<okbody_core::Result<_>>()?)
    }

    /// Index of the dependent variable, if any.
    fn dependent(&self) -> CliResult<Option<usize>> {
        for l in &self.local {
            if !self.variables.contains(l) {
                return Err(CliError::Usage(format!(
                    "local coordinate {l:?} is not a variable"
                )));
            }
        }
        let dep: Vec<usize> = (0..self.variables.len())
            .filter(|&i| !self.local.contains(&self.variables[i]))
            .collect();
        if dep.len() > 1 {
            return Err(CliError::Usage(format!(
                "{} dependent variables; at most one is supported",
                dep.len()
            )));
        }
        if dep.len() != self.equations.len() {
            return Err(CliError::Usage(format!(
                "{} equations for {} dependent variables",
                self.equations.len(),
                dep.len()
            )));
        }
        Ok(dep.first().copied())
    }

    /// Expands every section at the spec's truncation order, or at `trunc`.
    pub fn expand(&self, trunc: Option<u32>) -> CliResult<SeriesBundle> {
        let d = trunc.unwrap_or(self.trunc);
        let vars = self.var_refs();
        let p = self.point_rat()?;
        let dep = self.dependent()?;
        let n = self.n();
        let local_idx: Vec<usize> = self
            .local
            .iter()
            .map(|l| self.variables.iter().position(|v| v == l).expect("checked"))
            .collect();

        let eqs = self
            .equations
            .iter()
            .map(|e| parse_polynomial(e, &vars))
            .collect::<okbody_core::Result<Vec<_>>>()?;
        for g in &eqs {
            let r = g.eval(&p);
            if !r.is_zero() {
                return Err(Error::PointNotOnVariety { residual: r }.into());
            }
        }

        // each variable as a series in u
        let mut args: Vec<Option<QSeries>> = vec![None; self.variables.len()];
        for (i, &v) in local_idx.iter().enumerate() {
            let s = QSeries::constant(n, d, p[v].clone()).add(&QSeries::var(n, d, i))?;
            args[v] = Some(s);
        }
        if let Some(y) = dep {
            let g = shift_to_local(&eqs[0], &p, &local_idx, y)?;
            args[y] = Some(implicit_solve(&g, &p[y], d)?);
        }
        let args: Vec<QSeries> = args
            .into_iter()
            .map(|a| a.expect("every variable assigned"))
            .collect();

        let tau = parse_polynomial(&self.tau.expr, &vars)?.compose(&args)?;
        let tau_inv = tau.invert().map_err(|_| {
            CliError::Core(Error::InvalidArgument(format!(
                "tau = {} vanishes at the point",
                self.tau.expr
            )))
        })?;
        let names = local_names(n);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut sections = Vec::with_capacity(self.sections.len());
        for s in &self.sections {
            let num = parse_polynomial(&s.numerator, &vars)?.compose(&args)?;
            let f = num.mul(&tau_inv)?;
            sections.push(BundleEntry {
                id: s.id.clone(),
                display: f.display_with(&refs),
                series: f,
            });
        }
        Ok(SeriesBundle {
            variety: self.name.clone(),
            local: names,
            trunc: d,
            sections,
        })
    }
}

/// Rewrites `g(x)` as a polynomial in `(u, y)` with `x_i = p_i + u_i` for
/// the local variables; the dependent variable is kept unshifted.
fn shift_to_local(
    g: &Polynomial<Rat>,
    p: &[Rat],
    local_idx: &[usize],
    y: usize,
) -> CliResult<Polynomial<Rat>> {
    let n = local_idx.len();
    let deg = g.degree().max(1);
    let mut args = vec![QSeries::zero(n + 1, deg); p.len()];
    for (i, &v) in local_idx.iter().enumerate() {
        args[v] = QSeries::constant(n + 1, deg, p[v].clone()).add(&QSeries::var(n + 1, deg, i))?;
    }
    args[y] = QSeries::var(n + 1, deg, n);
    let s = g.compose(&args)?;
    Ok(Polynomial::from_terms(
        n + 1,
        s.terms().map(|(e, c)| (e.clone(), c.clone())),
    )?)
}
