//! Structural / non-structural decomposition of the change in homogamy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counterfactual::{fit_observed, FitOptions, Method};
use crate::error::{Error, Result};
use crate::tables::{homogamy_share, ContingencyTable, TableWithSingles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Non-structural effect first, structural effect as the remainder.
    Sequential,
    /// Average over both factor orderings; the rounding residual is reported
    /// as interaction.
    WithInteraction,
}

impl Scheme {
    /// With-interaction for NM, sequential for the other methods.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Nm(_) => Scheme::WithInteraction,
            _ => Scheme::Sequential,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sequential => "sequential",
            Scheme::WithInteraction => "with-interaction",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Scheme::Sequential),
            "with-interaction" | "interaction" => Ok(Scheme::WithInteraction),
            _ => Err(Error::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub method: Method,
    pub scheme: Scheme,
    pub share_early: f64,
    pub share_late: f64,
    /// Share of the late association at early marginals.
    pub share_counterfactual: f64,
    pub nonstructural_effect: f64,
    pub structural_effect: f64,
    pub interaction_effect: Option<f64>,
}

impl DecompositionResult {
    pub fn total_change(&self) -> f64 {
        self.share_late - self.share_early
    }
}

fn compatible(early: &ContingencyTable, late: &ContingencyTable) -> Result<()> {
    if early.dim() != late.dim()
        || early.row_labels() != late.row_labels()
        || early.col_labels() != late.col_labels()
    {
        return Err(Error::DimensionMismatch(
            "early and late tables have different categories".into(),
        ));
    }
    Ok(())
}

/// Decompose the change in homogamy share between two couples-only tables.
pub fn decompose(
    early: &ContingencyTable,
    late: &ContingencyTable,
    method: Method,
    scheme: Scheme,
    opts: &FitOptions,
) -> Result<DecompositionResult> {
    let wrap = |t: &ContingencyTable| {
        let (n, m) = t.dim();
        TableWithSingles::new(t.clone(), vec![0.0; n], vec![0.0; m])
    };
    decompose_observed(&wrap(early)?, &wrap(late)?, method, scheme, opts)
}

/// Decompose the change in homogamy share; singles are used by CSA only.
pub fn decompose_observed(
    early: &TableWithSingles,
    late: &TableWithSingles,
    method: Method,
    scheme: Scheme,
    opts: &FitOptions,
) -> Result<DecompositionResult> {
    compatible(early.couples(), late.couples())?;
    let share_early = homogamy_share(early.couples())?;
    let share_late = homogamy_share(late.couples())?;
    let cf = fit_observed(method, late, early, opts)?;
    let share_cf = homogamy_share(&cf.table)?;
    let (nonstructural, structural, interaction) = match scheme {
        Scheme::Sequential => (share_cf - share_early, share_late - share_cf, None),
        Scheme::WithInteraction => {
            // Average of the two orderings: homophily first, then structure
            // first.
            let other = fit_observed(method, early, late, opts)?;
            let share_other = homogamy_share(&other.table)?;
            let nonstructural =
                0.5 * ((share_cf - share_early) + (share_late - share_other));
            let structural = 0.5 * ((share_other - share_early) + (share_late - share_cf));
            let interaction = share_late - share_early - nonstructural - structural;
            (nonstructural, structural, Some(interaction))
        }
    };
    Ok(DecompositionResult {
        method,
        scheme,
        share_early,
        share_late,
        share_counterfactual: share_cf,
        nonstructural_effect: nonstructural,
        structural_effect: structural,
        interaction_effect: interaction,
    })
}

/// One wave of a cumulative series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub year: u32,
    /// Observed homogamy share, when the wave exists.
    pub observed: Option<f64>,
    /// Non-structural effect of the change from the previous wave.
    pub nonstructural_effect: Option<f64>,
    /// Anchor value plus all non-structural effects up to this wave.
    pub cumulative: Option<f64>,
    /// Why the effect into this wave is missing.
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSeries {
    pub anchor_year: u32,
    pub anchor_value: f64,
    pub points: Vec<SeriesPoint>,
}

/// Homogamy share at the anchor wave carried forward by consecutive
/// non-structural effects.
///
/// The anchor is the first wave followed by another present wave. A missing
/// wave or a failed decomposition leaves a gap; the chain is not continued
/// past a gap.
pub fn cumulative_series(
    waves: &[(u32, Option<TableWithSingles>)],
    method: Method,
    scheme: Scheme,
    opts: &FitOptions,
) -> Result<TrendSeries> {
    let present = waves.iter().filter(|(_, t)| t.is_some()).count();
    let anchor = waves
        .windows(2)
        .position(|w| w[0].1.is_some() && w[1].1.is_some());
    let (Some(anchor), true) = (anchor, present >= 2) else {
        return Err(Error::InsufficientData(
            "need two consecutive waves with tables".into(),
        ));
    };
    let anchor_table = waves[anchor].1.as_ref().expect("anchor present");
    let anchor_value = homogamy_share(anchor_table.couples())?;

    let mut points = Vec::with_capacity(waves.len());
    let mut running = Some(anchor_value);
    for (k, (year, table)) in waves.iter().enumerate() {
        let observed = match table {
            Some(t) => Some(homogamy_share(t.couples())?),
            None => None,
        };
        let mut point = SeriesPoint {
            year: *year,
            observed,
            nonstructural_effect: None,
            cumulative: None,
            gap: None,
        };
        if k == anchor {
            point.cumulative = Some(anchor_value);
        } else if k > anchor {
            match (&waves[k - 1].1, table) {
                (Some(early), Some(late)) => {
                    match decompose_observed(early, late, method, scheme, opts) {
                        Ok(d) => {
                            point.nonstructural_effect = Some(d.nonstructural_effect);
                            running = running.map(|v| v + d.nonstructural_effect);
                        }
                        Err(e) => {
                            point.gap = Some(e.to_string());
                            running = None;
                        }
                    }
                }
                _ => {
                    point.gap = Some("missing wave".into());
                    running = None;
                }
            }
            point.cumulative = running;
        }
        points.push(point);
    }
    Ok(TrendSeries {
        anchor_year: waves[anchor].0,
        anchor_value,
        points,
    })
}
