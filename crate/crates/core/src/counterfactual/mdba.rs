use ndarray::arr2;

use super::{check_target, settle_cells, CounterfactualResult, Method};
use crate::error::{Error, Result};
use crate::tables::{ContingencyTable, Marginals};

/// Determinant-preserving counterfactual for 2x2 tables.
///
/// The source determinant is first rescaled by `(N_target / N_source)^2`.
/// With fixed marginals the determinant equals `N d - r_H c_H`, so the
/// high–high cell is `d = (det + r_H c_H) / N`.
pub fn mdba_fit(source: &ContingencyTable, target: &Marginals) -> Result<CounterfactualResult> {
    let [a, b, c, d] = source.cells_2x2()?;
    if target.dim() != (2, 2) {
        let (rows, cols) = target.dim();
        return Err(Error::Shape {
            expected: "2x2",
            rows,
            cols,
        });
    }
    check_target(source, target)?;

    let n_s = source.total();
    let n = target.total();
    let det = (a * d - b * c) * (n / n_s) * (n / n_s);
    let r_h = target.row_sums()[1];
    let c_h = target.col_sums()[1];
    let d_new = (det + r_h * c_h) / n;
    let counts = arr2(&[
        [n - r_h - c_h + d_new, c_h - d_new],
        [r_h - d_new, d_new],
    ]);
    let counts = settle_cells(counts, n, "MDbA")?;
    Ok(
        CounterfactualResult::new(source.with_counts_unchecked(counts), Method::Mdba, target)
            .with_diag("determinant", det),
    )
}
