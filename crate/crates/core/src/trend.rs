//! Decade-by-state trend scoring: U-shape consistency and agreement with the
//! state top-income-share trend.

use serde::Serialize;

use crate::counterfactual::{FitOptions, Method};
use crate::decomposition::{decompose_observed, Scheme};
use crate::error::{Error, Result};
use crate::indicators::{ll_cells, IndicatorTag, Rounding};
use crate::panel::{IncomePanel, PanelDataset};
use crate::tables::ContingencyTable;

/// First years of the five decades spanned by the 1960-2010 waves.
pub const DECADES: [u32; 5] = [1960, 1970, 1980, 1990, 2000];

/// Last state of the first alphabetical half.
pub const ALPHA_BOUNDARY: &str = "Mississippi";

pub fn decade_label(decade: u32) -> String {
    format!("{decade}s")
}

/// Parse `"1970s"` or `"1970"`.
pub fn parse_decade(s: &str) -> Result<u32> {
    let d: u32 = s
        .trim_end_matches('s')
        .parse()
        .map_err(|_| Error::Config(format!("bad decade {s:?}")))?;
    if !DECADES.contains(&d) {
        return Err(Error::Config(format!("decade {s:?} outside 1960s..2000s")));
    }
    Ok(d)
}

/// Signed change of a measure over one decade in one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecadeChange {
    pub state: String,
    pub decade: u32,
    pub delta: Option<f64>,
    pub exclusion: Option<String>,
}

impl DecadeChange {
    pub fn valid(state: &str, decade: u32, delta: f64) -> Self {
        Self {
            state: state.to_string(),
            decade,
            delta: Some(delta),
            exclusion: None,
        }
    }

    pub fn excluded(state: &str, decade: u32, reason: impl Into<String>) -> Self {
        Self {
            state: state.to_string(),
            decade,
            delta: None,
            exclusion: Some(reason.into()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.delta.is_some()
    }
}

/// Falling in the 1960s-1980s, rising in the 1990s-2000s. Zero is
/// inconsistent.
pub fn u_consistent(decade: u32, delta: f64) -> bool {
    match decade {
        1960 | 1970 | 1980 => delta < 0.0,
        1990 | 2000 => delta > 0.0,
        _ => false,
    }
}

/// Consistency flag for each `(decade, delta)` of one state.
pub fn classify_u_shape(changes: &[(u32, f64)]) -> Vec<(u32, bool)> {
    changes
        .iter()
        .map(|&(d, v)| (d, u_consistent(d, v)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "flag", content = "reason")]
pub enum IncomeFlag {
    Consistent,
    Inconsistent,
    Excluded(String),
}

impl IncomeFlag {
    pub fn name(&self) -> &'static str {
        match self {
            IncomeFlag::Consistent => "consistent",
            IncomeFlag::Inconsistent => "inconsistent",
            IncomeFlag::Excluded(_) => "excluded",
        }
    }
}

fn same_sign(a: f64, b: f64) -> bool {
    (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)
}

/// Does each change move with the state's top-10% income share?
pub fn income_consistency(changes: &[DecadeChange], income: &IncomePanel) -> Vec<IncomeFlag> {
    changes
        .iter()
        .map(|c| {
            let Some(delta) = c.delta else {
                return IncomeFlag::Excluded("invalid pair".into());
            };
            match income.decade_delta(&c.state, c.decade) {
                None => IncomeFlag::Excluded(format!(
                    "missing income share for {} {}",
                    c.state,
                    decade_label(c.decade)
                )),
                Some(inc) if same_sign(delta, inc) => IncomeFlag::Consistent,
                Some(_) => IncomeFlag::Inconsistent,
            }
        })
        .collect()
}

pub fn in_first_half(state: &str, boundary: &str) -> bool {
    state <= boundary
}

/// Per-pair classification behind [`TrendStats`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub state: String,
    pub decade: u32,
    pub delta: Option<f64>,
    pub first_half: bool,
    pub u_consistent: Option<bool>,
    pub income: IncomeFlag,
    pub exclusion: Option<String>,
}

pub fn classify_pairs(
    changes: &[DecadeChange],
    income: &IncomePanel,
    boundary: &str,
) -> Vec<PairRecord> {
    changes
        .iter()
        .zip(income_consistency(changes, income))
        .map(|(c, flag)| PairRecord {
            state: c.state.clone(),
            decade: c.decade,
            delta: c.delta,
            first_half: in_first_half(&c.state, boundary),
            u_consistent: c.delta.map(|v| u_consistent(c.decade, v)),
            income: flag,
            exclusion: c.exclusion.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendStats {
    #[serde(rename = "n_U")]
    pub n_u: usize,
    pub n_s: usize,
    pub n_alpha: usize,
    pub n_omega: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_alpha")]
    pub n_alpha_total: usize,
    #[serde(rename = "N_omega")]
    pub n_omega_total: usize,
    pub alpha_ratio: Option<f64>,
    pub omega_ratio: Option<f64>,
    pub s_ratio: Option<f64>,
    pub u_ratio: Option<f64>,
}

fn ratio(k: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| k as f64 / n as f64)
}

/// Count consistent pairs among valid pairs; a pair without an income datum
/// still counts towards `N` but never towards `n_s`.
pub fn score(changes: &[DecadeChange], income: &IncomePanel, boundary: &str) -> TrendStats {
    score_pairs(&classify_pairs(changes, income, boundary))
}

pub fn score_pairs(pairs: &[PairRecord]) -> TrendStats {
    let valid = pairs.iter().filter(|p| p.delta.is_some());
    let (mut n_u, mut n_alpha, mut n_omega) = (0, 0, 0);
    let (mut n, mut n_alpha_total, mut n_omega_total) = (0, 0, 0);
    for p in valid {
        n += 1;
        if p.first_half {
            n_alpha_total += 1;
        } else {
            n_omega_total += 1;
        }
        if p.u_consistent == Some(true) {
            n_u += 1;
        }
        if p.income == IncomeFlag::Consistent {
            if p.first_half {
                n_alpha += 1;
            } else {
                n_omega += 1;
            }
        }
    }
    let n_s = n_alpha + n_omega;
    TrendStats {
        n_u,
        n_s,
        n_alpha,
        n_omega,
        n,
        n_alpha_total,
        n_omega_total,
        alpha_ratio: ratio(n_alpha, n_alpha_total),
        omega_ratio: ratio(n_omega, n_omega_total),
        s_ratio: ratio(n_s, n),
        u_ratio: ratio(n_u, n),
    }
}

/// What is tracked across waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Measure {
    /// Scalar indicator of the couple table.
    Indicator { tag: IndicatorTag, rounding: Rounding },
    /// Non-structural effect of the change between consecutive waves.
    Nonstructural { method: Method, scheme: Scheme },
}

impl Measure {
    pub fn name(&self) -> String {
        match self {
            Measure::Indicator { tag, .. } => tag.name().to_string(),
            Measure::Nonstructural { method, .. } => method.name().to_string(),
        }
    }
}

fn indicator_value(t: &ContingencyTable, tag: IndicatorTag, rounding: Rounding) -> Result<f64> {
    let v = match tag {
        IndicatorTag::LiuLu | IndicatorTag::GeneralizedLiuLu => {
            ll_cells(t.cells_2x2()?, rounding)?.value
        }
        _ => tag.scalar(t)?,
    };
    if !v.is_finite() {
        return Err(Error::UndefinedIndicator(format!("{} is {v}", tag.name())));
    }
    Ok(v)
}

/// Change of `measure` for every state and decade of the panel.
pub fn decade_changes(
    panel: &PanelDataset,
    measure: Measure,
    opts: &FitOptions,
) -> Vec<DecadeChange> {
    let mut out = Vec::new();
    for state in panel.states() {
        for decade in DECADES {
            out.push(decade_change(panel, &state, decade, measure, opts));
        }
    }
    out
}

fn decade_change(
    panel: &PanelDataset,
    state: &str,
    decade: u32,
    measure: Measure,
    opts: &FitOptions,
) -> DecadeChange {
    let late_year = decade + 10;
    let (early, late) = match (panel.table(state, decade), panel.table(state, late_year)) {
        (None, _) => return DecadeChange::excluded(state, decade, format!("missing {decade} wave")),
        (_, None) => {
            return DecadeChange::excluded(state, decade, format!("missing {late_year} wave"))
        }
        (Some(e), Some(l)) => (e, l),
    };
    let delta = early.and_then(|early| {
        let late = late?;
        match measure {
            Measure::Indicator { tag, rounding } => {
                let ve = indicator_value(early.couples(), tag, rounding)
                    .map_err(|e| e.with_context(format!("{decade} wave")))?;
                let vl = indicator_value(late.couples(), tag, rounding)
                    .map_err(|e| e.with_context(format!("{late_year} wave")))?;
                Ok(vl - ve)
            }
            Measure::Nonstructural { method, scheme } => {
                decompose_observed(&early, &late, method, scheme, opts)
                    .map(|d| d.nonstructural_effect)
            }
        }
    });
    match delta {
        Ok(v) => DecadeChange::valid(state, decade, v),
        Err(e) => DecadeChange::excluded(
            state,
            decade,
            e.with_context(format!("{state} {}", decade_label(decade)))
                .to_string(),
        ),
    }
}
