//! Decade-by-state panels of couple tables and top-income shares.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::{merge_categories, ContingencyTable, Partition, TableWithSingles};

/// Census waves covered by default.
pub const DEFAULT_WAVES: [u32; 6] = [1960, 1970, 1980, 1990, 2000, 2010];

/// Records under this state code are excluded from the national table
/// unless requested.
pub const UNKNOWN_STATE: &str = "UNKNOWN";

/// Education label marking the absent partner of a single person.
pub const SINGLE_LABEL: &str = "single";

pub fn default_categories() -> Vec<String> {
    ["no_hs", "hs", "college"].iter().map(|s| s.to_string()).collect()
}

/// How the ordered education categories are grouped before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoryScheme {
    /// All categories kept.
    #[default]
    Three,
    /// Lowest category against the rest.
    Hs,
    /// Highest category against the rest.
    College,
}

impl CategoryScheme {
    pub fn name(self) -> &'static str {
        match self {
            CategoryScheme::Three => "three",
            CategoryScheme::Hs => "hs",
            CategoryScheme::College => "college",
        }
    }

    /// Grouping of `len` ordered categories.
    pub fn partition(self, len: usize) -> Result<Partition> {
        if len < 2 {
            return Err(Error::Config(format!("need at least 2 categories, got {len}")));
        }
        match self {
            CategoryScheme::Three => Ok(Partition::identity(len)),
            CategoryScheme::Hs => Partition::from_sizes(&[1, len - 1]),
            CategoryScheme::College => Partition::from_sizes(&[len - 1, 1]),
        }
    }
}

impl fmt::Display for CategoryScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CategoryScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three" => Ok(CategoryScheme::Three),
            "hs" => Ok(CategoryScheme::Hs),
            "college" => Ok(CategoryScheme::College),
            _ => Err(Error::Config(format!("unknown category scheme {s:?}"))),
        }
    }
}

/// Raw counts for one (state, year); may be empty or all-singles.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelCell {
    pub couples: Array2<f64>,
    pub single_men: Vec<f64>,
    pub single_women: Vec<f64>,
}

impl PanelCell {
    fn zeros(n: usize) -> Self {
        Self {
            couples: Array2::zeros((n, n)),
            single_men: vec![0.0; n],
            single_women: vec![0.0; n],
        }
    }

    fn add(&mut self, other: &PanelCell) {
        self.couples += &other.couples;
        for (a, b) in self.single_men.iter_mut().zip(&other.single_men) {
            *a += b;
        }
        for (a, b) in self.single_women.iter_mut().zip(&other.single_women) {
            *a += b;
        }
    }

    fn merged(&self, p: &Partition) -> Self {
        let sum = |v: &[f64]| p.blocks().iter().map(|b| v[b.clone()].iter().sum()).collect();
        let n = p.num_blocks();
        let mut couples = Array2::zeros((n, n));
        for (i, bi) in p.blocks().iter().enumerate() {
            for (j, bj) in p.blocks().iter().enumerate() {
                couples[[i, j]] = self
                    .couples
                    .slice(ndarray::s![bi.clone(), bj.clone()])
                    .sum();
            }
        }
        Self {
            couples,
            single_men: sum(&self.single_men),
            single_women: sum(&self.single_women),
        }
    }

    pub fn has_singles(&self) -> bool {
        self.single_men.iter().chain(&self.single_women).any(|v| *v > 0.0)
    }
}

/// Couple tables keyed by (state, census year) over a common ordered list of
/// education categories.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    categories: Vec<String>,
    cells: BTreeMap<(String, u32), PanelCell>,
}

impl PanelDataset {
    pub fn new(categories: Vec<String>) -> Result<Self> {
        if categories.len() < 2 {
            return Err(Error::Config("need at least 2 categories".into()));
        }
        let distinct: BTreeSet<_> = categories.iter().collect();
        if distinct.len() != categories.len() {
            return Err(Error::Config("duplicate category labels".into()));
        }
        if categories.iter().any(|c| c == SINGLE_LABEL || c.is_empty()) {
            return Err(Error::Config(format!(
                "category labels must be nonempty and not {SINGLE_LABEL:?}"
            )));
        }
        Ok(Self {
            categories,
            cells: BTreeMap::new(),
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }

    /// Add `count` couples (both indices given), single men (`wife` absent)
    /// or single women (`husband` absent).
    pub fn add(
        &mut self,
        state: &str,
        year: u32,
        husband: Option<usize>,
        wife: Option<usize>,
        count: f64,
    ) -> Result<()> {
        let n = self.categories.len();
        if !count.is_finite() || count < 0.0 {
            return Err(Error::InvalidTable(format!("invalid count {count}")));
        }
        if husband.is_some_and(|i| i >= n) || wife.is_some_and(|j| j >= n) {
            return Err(Error::InvalidTable("category index out of range".into()));
        }
        let cell = self
            .cells
            .entry((state.to_string(), year))
            .or_insert_with(|| PanelCell::zeros(n));
        match (husband, wife) {
            (Some(i), Some(j)) => cell.couples[[i, j]] += count,
            (Some(i), None) => cell.single_men[i] += count,
            (None, Some(j)) => cell.single_women[j] += count,
            (None, None) => {
                return Err(Error::InvalidTable("record has no partner".into()));
            }
        }
        Ok(())
    }

    pub fn cell(&self, state: &str, year: u32) -> Option<&PanelCell> {
        self.cells.get(&(state.to_string(), year))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(String, u32), &PanelCell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// States in alphabetical order, without the reserved unknown code.
    pub fn states(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .cells
            .keys()
            .map(|(s, _)| s)
            .filter(|s| *s != UNKNOWN_STATE)
            .collect();
        set.into_iter().cloned().collect()
    }

    pub fn years(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.cells.keys().map(|(_, y)| *y).collect();
        set.into_iter().collect()
    }

    fn to_table(&self, cell: &PanelCell) -> Result<TableWithSingles> {
        let couples = ContingencyTable::new(
            cell.couples.clone(),
            self.categories.clone(),
            self.categories.clone(),
        )?;
        TableWithSingles::new(couples, cell.single_men.clone(), cell.single_women.clone())
    }

    /// Validated table for one (state, year); `None` when the wave is absent.
    pub fn table(&self, state: &str, year: u32) -> Option<Result<TableWithSingles>> {
        self.cell(state, year)
            .map(|c| self.to_table(c).map_err(|e| e.with_context(format!("{state} {year}"))))
    }

    /// Sum over states for one year.
    pub fn national_cell(&self, year: u32, include_unknown: bool) -> Option<PanelCell> {
        let mut acc: Option<PanelCell> = None;
        for ((state, y), cell) in &self.cells {
            if *y != year || (!include_unknown && state == UNKNOWN_STATE) {
                continue;
            }
            acc.get_or_insert_with(|| PanelCell::zeros(self.categories.len()))
                .add(cell);
        }
        acc
    }

    pub fn national(&self, year: u32, include_unknown: bool) -> Option<Result<TableWithSingles>> {
        self.national_cell(year, include_unknown)
            .map(|c| self.to_table(&c).map_err(|e| e.with_context(format!("national {year}"))))
    }

    /// Regroup categories of every cell.
    pub fn regroup(&self, scheme: CategoryScheme) -> Result<Self> {
        let p = scheme.partition(self.categories.len())?;
        if scheme == CategoryScheme::Three {
            return Ok(self.clone());
        }
        let categories = p
            .blocks()
            .iter()
            .map(|b| self.categories[b.clone()].join("+"))
            .collect();
        Ok(Self {
            categories,
            cells: self
                .cells
                .iter()
                .map(|(k, c)| (k.clone(), c.merged(&p)))
                .collect(),
        })
    }

    /// Drop every wave of one state.
    pub fn without_state(&self, state: &str) -> Self {
        Self {
            categories: self.categories.clone(),
            cells: self
                .cells
                .iter()
                .filter(|((s, _), _)| s != state)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drop one (state, year) wave.
    pub fn without_wave(&self, state: &str, year: u32) -> Self {
        let mut out = self.clone();
        out.cells.remove(&(state.to_string(), year));
        out
    }
}

/// Merge a validated table into the given scheme.
pub fn regroup_table(t: &TableWithSingles, scheme: CategoryScheme) -> Result<TableWithSingles> {
    let p = scheme.partition(t.couples().nrows())?;
    let q = scheme.partition(t.couples().ncols())?;
    let sum = |v: &[f64], p: &Partition| -> Vec<f64> {
        p.blocks().iter().map(|b| v[b.clone()].iter().sum()).collect()
    };
    TableWithSingles::new(
        merge_categories(t.couples(), &p, &q)?,
        sum(t.single_men(), &p),
        sum(t.single_women(), &q),
    )
}

/// Top 10% income share per (state, year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IncomePanel {
    shares: BTreeMap<(String, u32), f64>,
}

impl IncomePanel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, state: &str, year: u32, share: f64) -> Result<()> {
        if !(share > 0.0 && share < 1.0) {
            return Err(Error::InvalidTable(format!(
                "top-10% share must lie in (0, 1), got {share}"
            )));
        }
        self.shares.insert((state.to_string(), year), share);
        Ok(())
    }

    pub fn share(&self, state: &str, year: u32) -> Option<f64> {
        self.shares.get(&(state.to_string(), year)).copied()
    }

    /// Change over the decade starting at `decade`.
    pub fn decade_delta(&self, state: &str, decade: u32) -> Option<f64> {
        Some(self.share(state, decade + 10)? - self.share(state, decade)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, u32), &f64)> {
        self.shares.iter()
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}
