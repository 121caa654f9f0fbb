//! Replayable criterion instances.

use ndarray::Array2;

use crate::counterfactual::{fit_observed, meda_weight, CounterfactualResult, FitOptions, Method};
use crate::error::{Error, Result};
use crate::indicators::{gll_with, surplus_matrix, IndicatorTag, Rounding};
use crate::tables::{homogamy_share, merge_counts, ContingencyTable, Partition, TableWithSingles};

/// Relative gap between two numbers, scaled by `max(1, |a|, |b|)`.
/// Equal infinities have no gap; any other infinity is an infinite gap.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
    }
}

/// Largest entrywise relative gap; mismatched shapes are an infinite gap.
pub fn matrix_gap(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| relative_gap(*x, *y))
        .fold(0.0, f64::max)
}

/// Largest entrywise amount by which `lower` exceeds `upper`, relative.
pub fn excess(lower: &Array2<f64>, upper: &Array2<f64>) -> f64 {
    if lower.dim() != upper.dim() {
        return f64::INFINITY;
    }
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| if l <= u { 0.0 } else { relative_gap(*l, *u) })
        .fold(0.0, f64::max)
}

/// One concrete instance of a criterion, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// `indicator(lhs) = indicator(rhs)`, transposing the right-hand value
    /// first when `transpose_rhs` is set.
    Equal {
        indicator: IndicatorTag,
        lhs: TableWithSingles,
        rhs: TableWithSingles,
        transpose_rhs: bool,
    },
    /// `indicator(lower) <= indicator(upper)` entrywise.
    AtMost {
        indicator: IndicatorTag,
        lower: TableWithSingles,
        upper: TableWithSingles,
    },
    /// `fit(r * source, target) = fit(source, target)`.
    MethodScale {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
        r: f64,
    },
    /// `fit(source', target') = fit(source, target)'`.
    MethodTranspose {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
    },
    /// Target marginals and the preserved factor are both reproduced.
    MethodContract {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
    },
    /// Adding `diagonal` to the source never lowers the counterfactual
    /// homogamy share.
    MethodDiagonal {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
        diagonal: Vec<f64>,
    },
    /// `merge(fit(source, target)) = fit(merge(source), merge(target))`.
    MethodMerge {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
        rows: Partition,
        cols: Partition,
    },
    /// The method must fail with an infeasibility error.
    MethodSignal {
        method: Method,
        source: TableWithSingles,
        target: TableWithSingles,
    },
}

fn eval(tag: IndicatorTag, t: &TableWithSingles) -> Result<Array2<f64>> {
    tag.evaluate_with_singles(t)
}

fn run(method: Method, source: &TableWithSingles, target: &TableWithSingles) -> Result<CounterfactualResult> {
    fit_observed(method, source, target, &FitOptions::default())
}

impl Probe {
    /// Size of the criterion violation; `Err` when the instance is outside
    /// the subject's domain (undefined indicator, infeasible fit, ...).
    pub fn violation(&self) -> Result<f64> {
        match self {
            Probe::Equal {
                indicator,
                lhs,
                rhs,
                transpose_rhs,
            } => {
                let l = eval(*indicator, lhs)?;
                let mut r = eval(*indicator, rhs)?;
                if *transpose_rhs {
                    r = r.reversed_axes();
                }
                Ok(matrix_gap(&l, &r))
            }
            Probe::AtMost {
                indicator,
                lower,
                upper,
            } => Ok(excess(&eval(*indicator, lower)?, &eval(*indicator, upper)?)),
            Probe::MethodScale {
                method,
                source,
                target,
                r,
            } => {
                let a = run(*method, &source.scaled(*r), target)?;
                let b = run(*method, source, target)?;
                Ok(matrix_gap(a.table.counts(), b.table.counts()))
            }
            Probe::MethodTranspose {
                method,
                source,
                target,
            } => {
                let a = run(*method, &source.transpose(), &target.transpose())?;
                let b = run(*method, source, target)?;
                Ok(matrix_gap(a.table.counts(), &b.table.counts().t().to_owned()))
            }
            Probe::MethodContract {
                method,
                source,
                target,
            } => {
                let r = run(*method, source, target)?;
                contract_gap(*method, source, target, &r)
            }
            Probe::MethodDiagonal {
                method,
                source,
                target,
                diagonal,
            } => {
                let mut raised = source.couples().counts().clone();
                for (i, v) in diagonal.iter().enumerate() {
                    raised[[i, i]] += v;
                }
                let raised = source.with_couples(source.couples().with_counts(raised)?)?;
                let lo = homogamy_share(&run(*method, source, target)?.table)?;
                let hi = homogamy_share(&run(*method, &raised, target)?.table)?;
                Ok(excess(
                    &Array2::from_elem((1, 1), lo),
                    &Array2::from_elem((1, 1), hi),
                ))
            }
            Probe::MethodMerge {
                method,
                source,
                target,
                rows,
                cols,
            } => {
                let full = run(*method, source, target)?;
                let merged_fit = merge_counts(full.table.counts(), rows, cols);
                let coarse = run(
                    *method,
                    &merge_with_singles(source, rows, cols)?,
                    &merge_with_singles(target, rows, cols)?,
                )?;
                Ok(matrix_gap(&merged_fit, coarse.table.counts()))
            }
            Probe::MethodSignal {
                method,
                source,
                target,
            } => match run(*method, source, target) {
                Err(e) if e.is_infeasible() => Ok(0.0),
                Err(e) => Err(e),
                Ok(_) => Ok(1.0),
            },
        }
    }
}

fn merge_vec(v: &[f64], p: &Partition) -> Vec<f64> {
    p.blocks().iter().map(|b| v[b.clone()].iter().sum()).collect()
}

/// Merge couples and singles with the same partitions.
pub fn merge_with_singles(t: &TableWithSingles, rows: &Partition, cols: &Partition) -> Result<TableWithSingles> {
    TableWithSingles::new(
        crate::tables::merge_categories(t.couples(), rows, cols)?,
        merge_vec(t.single_men(), rows),
        merge_vec(t.single_women(), cols),
    )
}

/// Local odds ratios of adjacent 2x2 blocks whose cells are all positive.
fn local_odds_ratios(x: &Array2<f64>, mask: &Array2<f64>) -> Vec<Option<f64>> {
    let (n, m) = x.dim();
    let mut out = Vec::new();
    for i in 0..n - 1 {
        for j in 0..m - 1 {
            let positive = [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)]
                .iter()
                .all(|&(a, b)| mask[[a, b]] > 0.0);
            out.push(positive.then(|| {
                x[[i, j]] * x[[i + 1, j + 1]] / (x[[i, j + 1]] * x[[i + 1, j]])
            }));
        }
    }
    out
}

/// How far a counterfactual result is from its method's contract: target
/// marginals (populations for CSA) and the preserved association factor.
pub fn contract_gap(
    method: Method,
    source: &TableWithSingles,
    target: &TableWithSingles,
    result: &CounterfactualResult,
) -> Result<f64> {
    let s = source.couples();
    let out = &result.table;
    let factor = match method {
        Method::Ipf => local_odds_ratios(s.counts(), s.counts())
            .into_iter()
            .zip(local_odds_ratios(out.counts(), s.counts()))
            .filter_map(|(a, b)| Some(relative_gap(a?, b?)))
            .fold(0.0, f64::max),
        Method::Mdba => {
            let scale = out.total() / s.total();
            relative_gap(
                crate::indicators::determinant(out)?,
                crate::indicators::determinant(s)? * scale * scale,
            )
        }
        Method::Meda => relative_gap(meda_weight(out)?, meda_weight(s)?),
        Method::Nm(rounding) => nm_gll_gap(s, out, rounding),
        Method::Csa => {
            let fit = result
                .singles
                .as_ref()
                .ok_or_else(|| Error::DegenerateInput("CSA result without singles".into()))?;
            let fitted = TableWithSingles::new(out.clone(), fit.men.clone(), fit.women.clone())?;
            matrix_gap(
                &surplus_matrix(&fitted)?.values,
                &surplus_matrix(source)?.values,
            )
        }
    };
    let marginal = match method {
        Method::Csa => {
            let fit = result.singles.as_ref().expect("checked above");
            let m = out.marginals();
            let men = target.men_population();
            let women = target.women_population();
            let scale = men.iter().sum::<f64>().max(1.0);
            let rows = (0..men.len()).map(|i| (fit.men[i] + m.row_sums()[i] - men[i]).abs());
            let cols = (0..women.len()).map(|j| (fit.women[j] + m.col_sums()[j] - women[j]).abs());
            rows.chain(cols).fold(0.0, f64::max) / scale
        }
        _ => target.couples().marginals().max_relative_error(out),
    };
    Ok(factor.max(marginal))
}

/// GLL gap over entries defined for the result.
fn nm_gll_gap(source: &ContingencyTable, out: &ContingencyTable, rounding: Rounding) -> f64 {
    let a = gll_with(source, rounding);
    let b = gll_with(out, rounding);
    let (r, c) = a.dim();
    let mut gap: f64 = 0.0;
    for j in 1..=r {
        for k in 1..=c {
            if let (Ok(x), Ok(y)) = (a.entry(j, k), b.entry(j, k)) {
                gap = gap.max(relative_gap(x.value, y.value));
            }
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps() {
        assert_eq!(relative_gap(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(relative_gap(f64::INFINITY, 3.0), f64::INFINITY);
        assert_eq!(relative_gap(0.5, 0.25), 0.25);
        assert_eq!(relative_gap(200.0, 100.0), 0.5);
        let a = Array2::from_elem((1, 1), 2.0);
        let b = Array2::from_elem((1, 1), 4.0);
        assert_eq!(excess(&a, &b), 0.0);
        assert_eq!(excess(&b, &a), 0.5);
        assert_eq!(matrix_gap(&a, &Array2::zeros((2, 1))), f64::INFINITY);
    }

    #[test]
    fn replay_transpose_of_regression() {
        let t = TableWithSingles::new(
            ContingencyTable::from_rows(&[[40., 10.], [20., 30.]]).unwrap(),
            vec![1., 1.],
            vec![1., 1.],
        )
        .unwrap();
        let probe = Probe::Equal {
            indicator: IndicatorTag::Regression,
            lhs: t.clone(),
            rhs: t.transpose(),
            transpose_rhs: false,
        };
        // beta_wm = 0.4, beta_mw = 1000/2400
        assert!((probe.violation().unwrap() - (1.0 / 2.4 - 0.4)).abs() < 1e-12);
    }
}
