use ndarray::{Array2, Axis};

use super::{check_target, CounterfactualResult, Method};
use crate::error::{Error, Result};
use crate::tables::{ContingencyTable, Marginals};

fn residual(x: &Array2<f64>, target: &Marginals) -> f64 {
    let rows = x.sum_axis(Axis(1));
    let cols = x.sum_axis(Axis(0));
    let r = rows
        .iter()
        .zip(target.row_sums())
        .map(|(a, b)| (a - b).abs());
    let c = cols
        .iter()
        .zip(target.col_sums())
        .map(|(a, b)| (a - b).abs());
    r.chain(c).fold(0.0, f64::max)
}

fn scale_axis(x: &mut Array2<f64>, axis: Axis, target: &[f64]) {
    let sums = x.sum_axis(if axis == Axis(0) { Axis(1) } else { Axis(0) });
    for (mut lane, (s, t)) in x.axis_iter_mut(axis).zip(sums.iter().zip(target)) {
        if *s > 0.0 {
            lane.mapv_inplace(|v| v * t / s);
        }
    }
}

/// Iterative proportional fitting of `source` to `target`.
///
/// Rows and columns are rescaled alternately until the largest absolute
/// marginal discrepancy is at most `tol * max(1, target total)`. Zero cells
/// of the source stay zero.
pub fn ipf_fit(
    source: &ContingencyTable,
    target: &Marginals,
    tol: f64,
    max_iter: usize,
) -> Result<CounterfactualResult> {
    check_target(source, target)?;
    let src = source.marginals();
    for (i, (s, t)) in src.row_sums().iter().zip(target.row_sums()).enumerate() {
        if *s == 0.0 && *t > 0.0 {
            return Err(Error::infeasible(format!(
                "source row {} is empty but its target margin is {t}",
                i + 1
            )));
        }
    }
    for (j, (s, t)) in src.col_sums().iter().zip(target.col_sums()).enumerate() {
        if *s == 0.0 && *t > 0.0 {
            return Err(Error::infeasible(format!(
                "source column {} is empty but its target margin is {t}",
                j + 1
            )));
        }
    }

    let bound = tol * target.total().max(1.0);
    let mut x = source.counts().clone();
    let mut iterations = 0;
    let mut res = residual(&x, target);
    while res > bound {
        if iterations == max_iter {
            return Err(Error::Convergence {
                iterations,
                residual: res,
            });
        }
        scale_axis(&mut x, Axis(0), target.row_sums());
        scale_axis(&mut x, Axis(1), target.col_sums());
        iterations += 1;
        res = residual(&x, target);
    }

    let mut out = CounterfactualResult::new(source.with_counts_unchecked(x), Method::Ipf, target);
    out.iterations = iterations;
    Ok(out.with_diag("residual", res))
}
