//! Directly computed homophily indicators.
//!
//! All scalar indicators are defined on 2x2 tables `[[a, b], [c, d]]` where
//! row/column 0 is the low category and 1 the high one. The generalized
//! Liu–Lu matrix extends the scalar Liu–Lu indicator to `n x m` tables by
//! evaluating it on every 2x2 aggregation of the table.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::{ContingencyTable, TableWithSingles};

/// How `int(R)` is treated in the Liu–Lu indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// `int(R)` is the integer part of `R`.
    #[default]
    #[serde(rename = "paper-integer", alias = "paper", alias = "integer")]
    Integer,
    /// `int(R)` is replaced by `R`.
    Continuous,
}

impl FromStr for Rounding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integer" | "paper" | "paper-integer" => Ok(Rounding::Integer),
            "continuous" => Ok(Rounding::Continuous),
            _ => Err(Error::Config(format!("unknown rounding mode {s:?}"))),
        }
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::Integer => "paper-integer",
            Rounding::Continuous => "continuous",
        })
    }
}

/// Integer part of a nonnegative `r`. Values within `1e-9` (relative) of an
/// integer snap to it so that sums carrying rounding noise do not drop a unit.
pub fn int_part(r: f64) -> f64 {
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * r.abs().max(1.0) {
        nearest
    } else {
        r.floor()
    }
}

fn undefined(what: &str, why: &str) -> Error {
    Error::UndefinedIndicator(format!("{what}: {why}"))
}

/// Odds ratio `ad / bc`; `+inf` when only the denominator vanishes.
pub fn odds_ratio(t: &ContingencyTable) -> Result<f64> {
    odds_ratio_cells(t.cells_2x2()?)
}

pub(crate) fn odds_ratio_cells([a, b, c, d]: [f64; 4]) -> Result<f64> {
    let (num, den) = (a * d, b * c);
    if den == 0.0 {
        if num > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(undefined("odds ratio", "ad = bc = 0"))
        }
    } else {
        Ok(num / den)
    }
}

/// Matrix determinant of a square table; `ad - bc` in the 2x2 case.
pub fn determinant(t: &ContingencyTable) -> Result<f64> {
    if !t.is_square() {
        let (rows, cols) = t.dim();
        return Err(Error::Shape {
            expected: "square",
            rows,
            cols,
        });
    }
    if let Ok([a, b, c, d]) = t.cells_2x2() {
        return Ok(a * d - b * c);
    }
    Ok(lu_determinant(t.counts().clone()))
}

/// Gaussian elimination with partial pivoting.
fn lu_determinant(mut x: Array2<f64>) -> f64 {
    let n = x.nrows();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| x[[i, col]].abs().total_cmp(&x[[j, col]].abs()))
            .unwrap_or(col);
        if x[[pivot, col]] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                x.swap([pivot, k], [col, k]);
            }
            det = -det;
        }
        let p = x[[col, col]];
        det *= p;
        for i in col + 1..n {
            let f = x[[i, col]] / p;
            for k in col..n {
                x[[i, k]] -= f * x[[col, k]];
            }
        }
    }
    det
}

/// Determinant divided by the squared total.
pub fn covariance(t: &ContingencyTable) -> Result<f64> {
    let [a, b, c, d] = t.cells_2x2()?;
    let n = a + b + c + d;
    Ok((a * d - b * c) / (n * n))
}

fn nonzero_margins([a, b, c, d]: [f64; 4], what: &str) -> Result<()> {
    if a + b <= 0.0 || c + d <= 0.0 || a + c <= 0.0 || b + d <= 0.0 {
        return Err(undefined(what, "a marginal sum is zero"));
    }
    Ok(())
}

pub fn correlation(t: &ContingencyTable) -> Result<f64> {
    let cells @ [a, b, c, d] = t.cells_2x2()?;
    nonzero_margins(cells, "correlation")?;
    Ok((a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d)).sqrt())
}

/// Slopes of the two 0/1 regressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionPair {
    /// Wife's education regressed on husband's.
    pub beta_wm: f64,
    /// Husband's education regressed on wife's.
    pub beta_mw: f64,
}

pub fn regression(t: &ContingencyTable) -> Result<RegressionPair> {
    let cells @ [a, b, c, d] = t.cells_2x2()?;
    nonzero_margins(cells, "regression")?;
    let det = a * d - b * c;
    Ok(RegressionPair {
        beta_wm: det / ((a + b) * (c + d)),
        beta_mw: det / ((a + c) * (b + d)),
    })
}

/// Members of the determinant-based family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetKind {
    Determinant,
    Covariance,
    Correlation,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetFamilyValue {
    Scalar(f64),
    Regression(RegressionPair),
}

pub fn det_family(kind: DetKind, t: &ContingencyTable) -> Result<DetFamilyValue> {
    Ok(match kind {
        DetKind::Determinant => DetFamilyValue::Scalar(determinant(t)?),
        DetKind::Covariance => DetFamilyValue::Scalar(covariance(t)?),
        DetKind::Correlation => DetFamilyValue::Scalar(correlation(t)?),
        DetKind::Regression => DetFamilyValue::Regression(regression(t)?),
    })
}

/// Local marital sorting parameters against random matching and their
/// homogamy-weighted average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MspComponents {
    pub msp_l: f64,
    pub msp_h: f64,
    pub aggregate: f64,
}

pub fn aggregate_msp(t: &ContingencyTable) -> Result<MspComponents> {
    let cells @ [a, b, c, d] = t.cells_2x2()?;
    nonzero_margins(cells, "aggregate MSP")?;
    if a + d <= 0.0 {
        return Err(undefined("aggregate MSP", "no homogamous couples"));
    }
    let n = a + b + c + d;
    let msp_l = a * n / ((a + b) * (a + c));
    let msp_h = d * n / ((c + d) * (b + d));
    Ok(MspComponents {
        msp_l,
        msp_h,
        aggregate: (msp_l * a + msp_h * d) / (a + d),
    })
}

/// `det / A`, with `A = (c+d)(a+c)` when `b >= c` and `(b+d)(a+b)` otherwise.
pub fn v_value(t: &ContingencyTable) -> Result<f64> {
    let [a, b, c, d] = t.cells_2x2()?;
    let denom = if b >= c {
        (c + d) * (a + c)
    } else {
        (b + d) * (a + b)
    };
    if denom == 0.0 {
        return Err(undefined("V-value", "A = 0"));
    }
    Ok((a * d - b * c) / denom)
}

/// The pieces of the simplified Liu–Lu indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiuLuDecomposition {
    /// Expected high–high count under random matching.
    pub r: f64,
    /// `int(R)` (or `R` itself in continuous mode).
    pub int_r: f64,
    /// Observed high–high count.
    pub d_obs: f64,
    /// Largest attainable high–high count, `min(b+d, c+d)`.
    pub d_max: f64,
    pub value: f64,
    /// False when `d < int(R)`; the simplified formula then no longer
    /// coincides with the original indicator.
    pub nonnegative_sorting: bool,
}

/// Simplified Liu–Lu indicator `(d - int(R)) / (min(b+d, c+d) - int(R))`.
pub fn ll_simplified(t: &ContingencyTable) -> Result<LiuLuDecomposition> {
    ll_cells(t.cells_2x2()?, Rounding::Integer)
}

/// Liu–Lu indicator on raw cells with an explicit rounding mode.
pub fn ll_cells([a, b, c, d]: [f64; 4], rounding: Rounding) -> Result<LiuLuDecomposition> {
    let n = a + b + c + d;
    if n <= 0.0 {
        return Err(undefined("LL", "empty table"));
    }
    let r = (c + d) * (b + d) / n;
    let int_r = match rounding {
        Rounding::Integer => int_part(r),
        Rounding::Continuous => r,
    };
    let d_max = (b + d).min(c + d);
    let denom = d_max - int_r;
    if denom.abs() <= 1e-12 * n.max(1.0) {
        return Err(undefined("LL", "min(b+d, c+d) = int(R)"));
    }
    Ok(LiuLuDecomposition {
        r,
        int_r,
        d_obs: d,
        d_max,
        value: (d - int_r) / denom,
        nonnegative_sorting: d >= int_r,
    })
}

/// A 1-based split of an `n x m` table: rows `1..=j` against `j+1..=n` and
/// columns `1..=k` against `k+1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AggregationSplit {
    pub j: usize,
    pub k: usize,
}

/// The 2x2 aggregation of `counts` at `split`, as `[a, b, c, d]`.
pub fn aggregate_at(counts: &Array2<f64>, split: AggregationSplit) -> [f64; 4] {
    let mut out = [0.0; 4];
    for ((i, l), v) in counts.indexed_iter() {
        let hi_row = i >= split.j;
        let hi_col = l >= split.k;
        out[(hi_row as usize) * 2 + hi_col as usize] += v;
    }
    out
}

/// Generalized Liu–Lu matrix with per-entry results.
#[derive(Debug, Clone, PartialEq)]
pub struct GllMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Result<LiuLuDecomposition>>,
}

impl GllMatrix {
    /// Shape `(n-1, m-1)`.
    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Entry at 1-based split `(j, k)`.
    pub fn entry(&self, j: usize, k: usize) -> &Result<LiuLuDecomposition> {
        &self.entries[(j - 1) * self.cols + (k - 1)]
    }

    /// All values, or the first undefined entry.
    pub fn values(&self) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (idx, e) in self.entries.iter().enumerate() {
            let (j, k) = (idx / self.cols, idx % self.cols);
            match e {
                Ok(ll) => out[[j, k]] = ll.value,
                Err(err) => {
                    return Err(Error::UndefinedGllEntry {
                        j: j + 1,
                        k: k + 1,
                        reason: err.to_string(),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Undefined entries with their 1-based splits.
    pub fn errors(&self) -> Vec<(AggregationSplit, &Error)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| {
                e.as_ref().err().map(|err| {
                    (
                        AggregationSplit {
                            j: idx / self.cols + 1,
                            k: idx % self.cols + 1,
                        },
                        err,
                    )
                })
            })
            .collect()
    }
}

/// Generalized Liu–Lu matrix of `t`.
pub fn gll(t: &ContingencyTable) -> GllMatrix {
    gll_counts(t.counts(), Rounding::Integer)
}

pub fn gll_with(t: &ContingencyTable, rounding: Rounding) -> GllMatrix {
    gll_counts(t.counts(), rounding)
}

pub(crate) fn gll_counts(counts: &Array2<f64>, rounding: Rounding) -> GllMatrix {
    let (n, m) = counts.dim();
    let mut entries = Vec::with_capacity((n - 1) * (m - 1));
    for j in 1..n {
        for k in 1..m {
            entries.push(ll_cells(aggregate_at(counts, AggregationSplit { j, k }), rounding));
        }
    }
    GllMatrix {
        rows: n - 1,
        cols: m - 1,
        entries,
    }
}

/// Choo–Siow surplus matrix `couples[i,j] / sqrt(single_men[i] * single_women[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurplusMatrix {
    pub values: Array2<f64>,
}

pub fn surplus_matrix(t: &TableWithSingles) -> Result<SurplusMatrix> {
    if t
        .single_men()
        .iter()
        .chain(t.single_women())
        .any(|v| *v <= 0.0)
    {
        return Err(undefined("surplus matrix", "a singles count is zero"));
    }
    let c = t.couples().counts();
    let values = Array2::from_shape_fn(c.dim(), |(i, j)| {
        c[[i, j]] / (t.single_men()[i] * t.single_women()[j]).sqrt()
    });
    Ok(SurplusMatrix { values })
}

/// The ten indicators, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorTag {
    OddsRatio,
    Determinant,
    Covariance,
    Correlation,
    Regression,
    AggregateMsp,
    VValue,
    SurplusMatrix,
    LiuLu,
    GeneralizedLiuLu,
}

impl IndicatorTag {
    pub const ALL: [IndicatorTag; 10] = [
        IndicatorTag::OddsRatio,
        IndicatorTag::Determinant,
        IndicatorTag::Covariance,
        IndicatorTag::Correlation,
        IndicatorTag::Regression,
        IndicatorTag::AggregateMsp,
        IndicatorTag::VValue,
        IndicatorTag::SurplusMatrix,
        IndicatorTag::LiuLu,
        IndicatorTag::GeneralizedLiuLu,
    ];

    /// `I1` .. `I10`.
    pub fn code(self) -> &'static str {
        match self {
            IndicatorTag::OddsRatio => "I1",
            IndicatorTag::Determinant => "I2",
            IndicatorTag::Covariance => "I3",
            IndicatorTag::Correlation => "I4",
            IndicatorTag::Regression => "I5",
            IndicatorTag::AggregateMsp => "I6",
            IndicatorTag::VValue => "I7",
            IndicatorTag::SurplusMatrix => "I8",
            IndicatorTag::LiuLu => "I9",
            IndicatorTag::GeneralizedLiuLu => "I10",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IndicatorTag::OddsRatio => "odds_ratio",
            IndicatorTag::Determinant => "determinant",
            IndicatorTag::Covariance => "covariance",
            IndicatorTag::Correlation => "correlation",
            IndicatorTag::Regression => "regression",
            IndicatorTag::AggregateMsp => "aggregate_msp",
            IndicatorTag::VValue => "v_value",
            IndicatorTag::SurplusMatrix => "surplus_matrix",
            IndicatorTag::LiuLu => "ll",
            IndicatorTag::GeneralizedLiuLu => "gll",
        }
    }

    /// Matrix-valued indicators (surplus matrix, generalized LL).
    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            IndicatorTag::SurplusMatrix | IndicatorTag::GeneralizedLiuLu
        )
    }

    pub fn needs_singles(self) -> bool {
        self == IndicatorTag::SurplusMatrix
    }

    /// Value of the indicator as a matrix (scalars are 1x1). The regression
    /// indicator reports `beta_wm`.
    pub fn evaluate(self, t: &ContingencyTable) -> Result<Array2<f64>> {
        if self.needs_singles() {
            return Err(undefined(self.name(), "requires singles counts"));
        }
        if self == IndicatorTag::GeneralizedLiuLu {
            return gll(t).values();
        }
        Ok(Array2::from_elem((1, 1), self.scalar(t)?))
    }

    pub fn evaluate_with_singles(self, t: &TableWithSingles) -> Result<Array2<f64>> {
        match self {
            IndicatorTag::SurplusMatrix => Ok(surplus_matrix(t)?.values),
            _ => self.evaluate(t.couples()),
        }
    }

    /// Scalar value; the generalized LL is accepted on 2x2 tables only.
    pub fn scalar(self, t: &ContingencyTable) -> Result<f64> {
        match self {
            IndicatorTag::OddsRatio => odds_ratio(t),
            IndicatorTag::Determinant => determinant(t),
            IndicatorTag::Covariance => covariance(t),
            IndicatorTag::Correlation => correlation(t),
            IndicatorTag::Regression => Ok(regression(t)?.beta_wm),
            IndicatorTag::AggregateMsp => Ok(aggregate_msp(t)?.aggregate),
            IndicatorTag::VValue => v_value(t),
            IndicatorTag::LiuLu => Ok(ll_simplified(t)?.value),
            IndicatorTag::GeneralizedLiuLu => {
                t.cells_2x2()?;
                Ok(ll_simplified(t)?.value)
            }
            IndicatorTag::SurplusMatrix => Err(undefined(self.name(), "matrix-valued")),
        }
    }
}

impl FromStr for IndicatorTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        IndicatorTag::ALL
            .into_iter()
            .find(|t| t.name() == lower || t.code().eq_ignore_ascii_case(&lower))
            .or(match lower.as_str() {
                "or" => Some(IndicatorTag::OddsRatio),
                "det" => Some(IndicatorTag::Determinant),
                "cov" => Some(IndicatorTag::Covariance),
                "corr" => Some(IndicatorTag::Correlation),
                "msp" => Some(IndicatorTag::AggregateMsp),
                "v" => Some(IndicatorTag::VValue),
                "msm" => Some(IndicatorTag::SurplusMatrix),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown indicator {s:?}")))
    }
}

impl fmt::Display for IndicatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
