use ndarray::Array2;

use super::{check_target, settle_cells, CounterfactualResult, Method};
use crate::error::{Error, Result};
use crate::indicators::{gll_counts, int_part, Rounding};
use crate::tables::{ContingencyTable, Marginals};

/// Upper-right survival sums of a table.
///
/// Entry `(j, k)` holds the sum of all cells in rows `j..n` and columns
/// `m..` (0-based), so row `n` and column `m` are zero and `(0, 0)` is the
/// total. Entry `(j, k)` with `1 <= j < n`, `1 <= k < m` is the high–high
/// cell of the 2x2 aggregation at split `(j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalGrid {
    pub values: Array2<f64>,
}

impl SurvivalGrid {
    pub fn from_counts(counts: &Array2<f64>) -> Self {
        let (n, m) = counts.dim();
        let mut s = Array2::zeros((n + 1, m + 1));
        for i in (0..n).rev() {
            for l in (0..m).rev() {
                s[[i, l]] = counts[[i, l]] + s[[i + 1, l]] + s[[i, l + 1]] - s[[i + 1, l + 1]];
            }
        }
        SurvivalGrid { values: s }
    }

    /// Boundary rows and columns filled from marginals; interior left zero.
    pub fn from_marginals(m: &Marginals) -> Self {
        let (n, k) = m.dim();
        let mut s = Array2::zeros((n + 1, k + 1));
        for j in (0..n).rev() {
            s[[j, 0]] = s[[j + 1, 0]] + m.row_sums()[j];
        }
        for l in (0..k).rev() {
            s[[0, l]] = s[[0, l + 1]] + m.col_sums()[l];
        }
        s[[0, 0]] = m.total();
        SurvivalGrid { values: s }
    }

    /// Cells by inclusion–exclusion.
    pub fn to_counts(&self) -> Array2<f64> {
        let (n1, m1) = self.values.dim();
        let s = &self.values;
        Array2::from_shape_fn((n1 - 1, m1 - 1), |(i, l)| {
            s[[i, l]] - s[[i + 1, l]] - s[[i, l + 1]] + s[[i + 1, l + 1]]
        })
    }
}

/// Counterfactual that keeps the generalized Liu–Lu matrix of `source`.
///
/// For every split the target 2x2 aggregation's high–high count is set so
/// that its LL value equals the source's; the cells then follow from the
/// survival grid. `rounding` applies to both the source LL and the target
/// `R`.
pub fn nm_fit(
    source: &ContingencyTable,
    target: &Marginals,
    rounding: Rounding,
) -> Result<CounterfactualResult> {
    check_target(source, target)?;
    let ll = gll_counts(source.counts(), rounding).values()?;
    let (n, m) = target.dim();
    let total = target.total();
    let mut grid = SurvivalGrid::from_marginals(target);
    for j in 1..n {
        for k in 1..m {
            let r_h = grid.values[[j, 0]];
            let c_h = grid.values[[0, k]];
            let r = r_h * c_h / total;
            let rho = match rounding {
                Rounding::Integer => int_part(r),
                Rounding::Continuous => r,
            };
            grid.values[[j, k]] = ll[[j - 1, k - 1]] * (r_h.min(c_h) - rho) + rho;
        }
    }
    let counts = settle_cells(grid.to_counts(), total, "NM")?;
    if counts.iter().any(|v| !v.is_finite()) {
        return Err(Error::infeasible("NM produced a non-finite cell"));
    }
    Ok(
        CounterfactualResult::new(source.with_counts_unchecked(counts), Method::Nm(rounding), target)
            .with_diag("rounding", rounding.to_string()),
    )
}
