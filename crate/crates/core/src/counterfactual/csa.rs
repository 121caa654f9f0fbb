use ndarray::{Array1, Array2};

use super::{CounterfactualResult, FitOptions, Method, SinglesFit};
use crate::error::{Error, Result};
use crate::indicators::surplus_matrix;
use crate::tables::TableWithSingles;

/// Positive root of `x^2 + s x - pop = 0`, written to avoid cancellation.
fn root(s: f64, pop: f64) -> f64 {
    2.0 * pop / (s + (s * s + 4.0 * pop).sqrt())
}

fn damp(old: f64, new: f64, w: f64) -> f64 {
    if w >= 1.0 {
        new
    } else {
        (old.ln() * (1.0 - w) + new.ln() * w).exp()
    }
}

/// Population identity residuals for `x = sqrt(single men)`, `y = sqrt(single women)`.
fn residual(msm: &Array2<f64>, x: &Array1<f64>, y: &Array1<f64>, men: &[f64], women: &[f64]) -> f64 {
    let sx = msm.dot(y);
    let sy = msm.t().dot(x);
    let r = (0..x.len()).map(|i| (x[i] * x[i] + x[i] * sx[i] - men[i]).abs());
    let c = (0..y.len()).map(|j| (y[j] * y[j] + y[j] * sy[j] - women[j]).abs());
    r.chain(c).fold(0.0, f64::max)
}

/// Reduced-form Choo–Siow counterfactual.
///
/// Holds the surplus matrix `MSM` of `source` fixed and finds singles
/// `(mu_m, mu_w)` and couples `mu[i,j] = MSM[i,j] sqrt(mu_m[i] mu_w[j])`
/// whose men and women populations equal `target_men` and `target_women`.
/// Solved by damped alternating updates of the square-rooted singles.
pub fn csa_fit(
    source: &TableWithSingles,
    target_men: &[f64],
    target_women: &[f64],
    opts: &FitOptions,
) -> Result<CounterfactualResult> {
    let msm = surplus_matrix(source)?.values;
    let (n, m) = msm.dim();
    if target_men.len() != n || target_women.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "source is {n}x{m}, target populations have lengths {} and {}",
            target_men.len(),
            target_women.len()
        )));
    }
    if target_men
        .iter()
        .chain(target_women)
        .any(|p| !(p.is_finite() && *p > 0.0))
    {
        return Err(Error::DegenerateInput(
            "target populations must be strictly positive".into(),
        ));
    }

    let scale = target_men
        .iter()
        .sum::<f64>()
        .max(target_women.iter().sum())
        .max(1.0);
    let bound = opts.tol * scale;
    let mut x: Array1<f64> = target_men.iter().map(|p| p.sqrt()).collect();
    let mut y: Array1<f64> = target_women.iter().map(|p| p.sqrt()).collect();
    let mut iterations = 0;
    let mut res = residual(&msm, &x, &y, target_men, target_women);
    while res > bound {
        if iterations == opts.max_iter {
            return Err(Error::Convergence {
                iterations,
                residual: res,
            });
        }
        let sx = msm.dot(&y);
        for i in 0..n {
            x[i] = damp(x[i], root(sx[i], target_men[i]), opts.damping);
        }
        let sy = msm.t().dot(&x);
        for j in 0..m {
            y[j] = damp(y[j], root(sy[j], target_women[j]), opts.damping);
        }
        if x.iter().chain(y.iter()).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::infeasible(
                "singles iterate left the positive orthant",
            ));
        }
        iterations += 1;
        res = residual(&msm, &x, &y, target_men, target_women);
    }

    let couples = Array2::from_shape_fn((n, m), |(i, j)| msm[[i, j]] * x[i] * y[j]);
    let men: Vec<f64> = x.iter().map(|v| v * v).collect();
    let women: Vec<f64> = y.iter().map(|v| v * v).collect();
    let table = source.couples().with_counts_unchecked(couples);
    let married = table.marginals();
    let mut out = CounterfactualResult::new(table, Method::Csa, &married);
    out.iterations = iterations;
    out.max_marginal_error = res / scale;
    out.singles = Some(SinglesFit { men, women });
    Ok(out
        .with_diag("damping", opts.damping)
        .with_diag("residual", res))
}
