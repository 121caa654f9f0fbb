//! Counterfactual tables: a source table's association carried over to
//! target marginals, under five competing notions of "association".

mod csa;
mod ipf;
mod mdba;
mod meda;
mod nm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::indicators::Rounding;
use crate::tables::{ContingencyTable, Marginals, TableWithSingles};

pub use csa::csa_fit;
pub use ipf::ipf_fit;
pub use mdba::mdba_fit;
pub use meda::{meda_fit, meda_weight};
pub use nm::{nm_fit, SurvivalGrid};

/// Cells below `-NEGATIVE_TOL * max(1, total)` make a result infeasible.
pub const NEGATIVE_TOL: f64 = 1e-9;

/// A counterfactual construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Iterative proportional fitting (odds ratio held fixed).
    Ipf,
    /// Determinant held fixed (2x2 only).
    Mdba,
    /// Euclidean projection weight between random and PAM matching.
    Meda,
    /// Reduced-form Choo–Siow: the surplus matrix held fixed.
    Csa,
    /// Generalized Liu–Lu matrix held fixed.
    Nm(Rounding),
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ipf,
        Method::Mdba,
        Method::Meda,
        Method::Csa,
        Method::Nm(Rounding::Integer),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ipf => "ipf",
            Method::Mdba => "mdba",
            Method::Meda => "meda",
            Method::Csa => "csa",
            Method::Nm(Rounding::Integer) => "nm",
            Method::Nm(Rounding::Continuous) => "nm-continuous",
        }
    }

    /// Same method with the NM rounding mode replaced; other methods unchanged.
    pub fn with_rounding(self, rounding: Rounding) -> Self {
        match self {
            Method::Nm(_) => Method::Nm(rounding),
            other => other,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ipf" => Method::Ipf,
            "mdba" => Method::Mdba,
            "meda" => Method::Meda,
            "csa" | "cs" => Method::Csa,
            "nm" | "nm-paper" => Method::Nm(Rounding::Integer),
            "nm-continuous" => Method::Nm(Rounding::Continuous),
            _ => return Err(Error::Config(format!("unknown method {s:?}"))),
        })
    }
}

/// Numerical settings shared by the iterative methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Log-scale damping of the CSA singles update; 1 means undamped.
    pub damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

/// Fitted singles from the CSA fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinglesFit {
    pub men: Vec<f64>,
    pub women: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualResult {
    pub table: ContingencyTable,
    pub method: Method,
    pub iterations: usize,
    /// Largest marginal discrepancy relative to `max(1, total)`; for CSA the
    /// population identities are used instead.
    pub max_marginal_error: f64,
    pub feasible: bool,
    pub diagnostics: BTreeMap<String, Value>,
    pub singles: Option<SinglesFit>,
}

impl CounterfactualResult {
    fn new(table: ContingencyTable, method: Method, target: &Marginals) -> Self {
        let max_marginal_error = target.max_relative_error(&table);
        CounterfactualResult {
            table,
            method,
            iterations: 0,
            max_marginal_error,
            feasible: true,
            diagnostics: BTreeMap::new(),
            singles: None,
        }
    }

    fn with_diag(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }
}

/// Fit `source` to `target` with a couples-only method.
pub fn fit(
    method: Method,
    source: &ContingencyTable,
    target: &Marginals,
    opts: &FitOptions,
) -> Result<CounterfactualResult> {
    match method {
        Method::Ipf => ipf_fit(source, target, opts.tol, opts.max_iter),
        Method::Mdba => mdba_fit(source, target),
        Method::Meda => meda_fit(source, target),
        Method::Nm(rounding) => nm_fit(source, target, rounding),
        Method::Csa => Err(Error::DegenerateInput(
            "CSA needs singles counts; use fit_observed or csa_fit".into(),
        )),
    }
}

/// Fit `source` to the structural factor of `target`: its marginals, or its
/// men/women populations for CSA.
pub fn fit_observed(
    method: Method,
    source: &TableWithSingles,
    target: &TableWithSingles,
    opts: &FitOptions,
) -> Result<CounterfactualResult> {
    match method {
        Method::Csa => csa_fit(
            source,
            &target.men_population(),
            &target.women_population(),
            opts,
        ),
        _ => fit(method, source.couples(), &target.couples().marginals(), opts),
    }
}

fn check_target(source: &ContingencyTable, target: &Marginals) -> Result<()> {
    if source.dim() != target.dim() {
        let (n, m) = source.dim();
        let (tn, tm) = target.dim();
        return Err(Error::DimensionMismatch(format!(
            "source is {n}x{m}, target marginals are {tn}x{tm}"
        )));
    }
    if target.total() <= 0.0 {
        return Err(Error::DegenerateInput("target total is zero".into()));
    }
    Ok(())
}

/// Reject cells below the negative tolerance and clear harmless round-off.
fn settle_cells(mut counts: Array2<f64>, total: f64, what: &str) -> Result<Array2<f64>> {
    let floor = -NEGATIVE_TOL * total.max(1.0);
    if let Some(((i, j), v)) = counts
        .indexed_iter()
        .filter(|(_, v)| **v < floor || !v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::Infeasible {
            reason: format!("{what} produced cell ({}, {}) = {v}", i + 1, j + 1),
            cell: Some((i, j, *v)),
        });
    }
    counts.mapv_inplace(|v| if v < 0.0 { 0.0 } else { v });
    Ok(counts)
}
