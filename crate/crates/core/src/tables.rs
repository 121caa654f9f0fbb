//! Contingency tables of couples by husband (rows) and wife (columns)
//! education, ordered low to high.
//!
//! Counts are stored as nonnegative reals because counterfactual tables are
//! generally non-integer. The reference matchings (random and perfectly
//! assortative) and the brute-force enumerator of the transportation
//! polytope live here as well.

use std::fmt;
use std::ops::Range;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing row and column totals.
pub const MARGIN_RTOL: f64 = 1e-9;

/// Default cap on the grand total accepted by [`enumerate_tables`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 40;

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn check_labels(labels: &[String], n: usize, axis: &str) -> Result<()> {
    if labels.len() != n {
        return Err(Error::InvalidTable(format!(
            "{axis} labels: expected {n}, got {}",
            labels.len()
        )));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidTable(format!("duplicate {axis} label {l:?}")));
        }
    }
    Ok(())
}

/// An `n x m` table of couple counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Array2<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn new(
        counts: Array2<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let (n, m) = counts.dim();
        if n < 2 || m < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 2x2, got {n}x{m}"
            )));
        }
        if let Some(v) = counts.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidTable(format!("invalid count {v}")));
        }
        if !counts.iter().any(|v| *v > 0.0) {
            return Err(Error::InvalidTable("all counts are zero".into()));
        }
        check_labels(&row_labels, n, "row")?;
        check_labels(&col_labels, m, "column")?;
        Ok(Self {
            counts,
            row_labels,
            col_labels,
        })
    }

    /// Build from row vectors with labels `1..=n` and `1..=m`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(Error::InvalidTable("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.as_ref().to_vec()).collect();
        let counts = Array2::from_shape_vec((n, m), flat)
            .map_err(|e| Error::InvalidTable(e.to_string()))?;
        Self::new(counts, default_labels(n), default_labels(m))
    }

    /// Same labels, new counts. Zero tables are allowed here: computed
    /// outputs (e.g. a surplus model where nobody marries) can be empty.
    pub(crate) fn with_counts_unchecked(&self, counts: Array2<f64>) -> Self {
        debug_assert_eq!(counts.dim(), self.counts.dim());
        Self {
            counts,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        }
    }

    pub(crate) fn from_counts_unchecked(counts: Array2<f64>) -> Self {
        let (n, m) = counts.dim();
        Self {
            counts,
            row_labels: default_labels(n),
            col_labels: default_labels(m),
        }
    }

    /// Replace counts, keeping labels, with full validation.
    pub fn with_counts(&self, counts: Array2<f64>) -> Result<Self> {
        if counts.dim() != self.counts.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                counts.dim(),
                self.counts.dim()
            )));
        }
        Self::new(counts, self.row_labels.clone(), self.col_labels.clone())
    }

    pub fn counts(&self) -> &Array2<f64> {
        &self.counts
    }

    pub fn nrows(&self) -> usize {
        self.counts.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.counts.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.counts.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.counts[[i, j]]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    pub fn marginals(&self) -> Marginals {
        marginals(self)
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Swap husbands and wives.
    pub fn transpose(&self) -> Self {
        Self {
            counts: self.counts.t().to_owned(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Multiply every cell by `r`.
    pub fn scaled(&self, r: f64) -> Self {
        self.with_counts_unchecked(&self.counts * r)
    }

    /// The cells `[a, b, c, d]` of a 2x2 table.
    pub fn cells_2x2(&self) -> Result<[f64; 4]> {
        if self.dim() != (2, 2) {
            return Err(Error::Shape {
                expected: "2x2",
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        let c = &self.counts;
        Ok([c[[0, 0]], c[[0, 1]], c[[1, 0]], c[[1, 1]]])
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.counts.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// True when every count is within `1e-9` of an integer.
    pub fn is_integral(&self) -> bool {
        self.counts.iter().all(|v| (v - v.round()).abs() <= 1e-9)
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.counts.rows().into_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A couple table together with single men (per row category) and single
/// women (per column category).
#[derive(Debug, Clone, PartialEq)]
pub struct TableWithSingles {
    couples: ContingencyTable,
    single_men: Vec<f64>,
    single_women: Vec<f64>,
}

impl TableWithSingles {
    pub fn new(
        couples: ContingencyTable,
        single_men: Vec<f64>,
        single_women: Vec<f64>,
    ) -> Result<Self> {
        if single_men.len() != couples.nrows() || single_women.len() != couples.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "singles ({}, {}) vs table {}x{}",
                single_men.len(),
                single_women.len(),
                couples.nrows(),
                couples.ncols()
            )));
        }
        if single_men
            .iter()
            .chain(&single_women)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidTable("singles must be nonnegative".into()));
        }
        Ok(Self {
            couples,
            single_men,
            single_women,
        })
    }

    pub(crate) fn from_parts_unchecked(
        couples: ContingencyTable,
        single_men: Vec<f64>,
        single_women: Vec<f64>,
    ) -> Self {
        Self {
            couples,
            single_men,
            single_women,
        }
    }

    pub fn couples(&self) -> &ContingencyTable {
        &self.couples
    }

    pub fn single_men(&self) -> &[f64] {
        &self.single_men
    }

    pub fn single_women(&self) -> &[f64] {
        &self.single_women
    }

    /// Men per category: married plus single.
    pub fn men_population(&self) -> Vec<f64> {
        let m = self.couples.marginals();
        m.row_sums
            .iter()
            .zip(&self.single_men)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Women per category: married plus single.
    pub fn women_population(&self) -> Vec<f64> {
        let m = self.couples.marginals();
        m.col_sums
            .iter()
            .zip(&self.single_women)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            couples: self.couples.transpose(),
            single_men: self.single_women.clone(),
            single_women: self.single_men.clone(),
        }
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            couples: self.couples.scaled(r),
            single_men: self.single_men.iter().map(|v| v * r).collect(),
            single_women: self.single_women.iter().map(|v| v * r).collect(),
        }
    }

    pub fn with_couples(&self, couples: ContingencyTable) -> Result<Self> {
        Self::new(couples, self.single_men.clone(), self.single_women.clone())
    }
}

/// Row sums, column sums and grand total.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub(crate) row_sums: Vec<f64>,
    pub(crate) col_sums: Vec<f64>,
    pub(crate) total: f64,
}

impl Marginals {
    /// Validates that both sides are nonnegative and sum to the same total.
    pub fn new(row_sums: Vec<f64>, col_sums: Vec<f64>) -> Result<Self> {
        if row_sums.is_empty() || col_sums.is_empty() {
            return Err(Error::InvalidTable("empty marginals".into()));
        }
        if row_sums
            .iter()
            .chain(&col_sums)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidTable("marginals must be nonnegative".into()));
        }
        let rt: f64 = row_sums.iter().sum();
        let ct: f64 = col_sums.iter().sum();
        if (rt - ct).abs() > MARGIN_RTOL * rt.max(ct).max(1.0) {
            return Err(Error::InvalidTable(format!(
                "row total {rt} differs from column total {ct}"
            )));
        }
        Ok(Self {
            row_sums,
            col_sums,
            total: rt,
        })
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.row_sums.len(), self.col_sums.len())
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            row_sums: self.row_sums.iter().map(|v| v * r).collect(),
            col_sums: self.col_sums.iter().map(|v| v * r).collect(),
            total: self.total * r,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            total: self.total,
        }
    }

    /// Aggregate both sides over contiguous blocks.
    pub fn merge(&self, rows: &Partition, cols: &Partition) -> Result<Self> {
        rows.check_len(self.row_sums.len(), "row")?;
        cols.check_len(self.col_sums.len(), "column")?;
        Ok(Self {
            row_sums: rows.aggregate(&self.row_sums),
            col_sums: cols.aggregate(&self.col_sums),
            total: self.total,
        })
    }

    /// Largest relative deviation of `t`'s marginals from these.
    pub fn max_relative_error(&self, t: &ContingencyTable) -> f64 {
        let m = t.marginals();
        let scale = self.total.max(1.0);
        self.row_sums
            .iter()
            .zip(&m.row_sums)
            .chain(self.col_sums.iter().zip(&m.col_sums))
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn is_integral(&self) -> bool {
        self.row_sums
            .iter()
            .chain(&self.col_sums)
            .all(|v| (v - v.round()).abs() <= 1e-9)
    }
}

/// Row sums, column sums and total of `t`.
pub fn marginals(t: &ContingencyTable) -> Marginals {
    let c = t.counts();
    Marginals {
        row_sums: c.sum_axis(Axis(1)).to_vec(),
        col_sums: c.sum_axis(Axis(0)).to_vec(),
        total: c.sum(),
    }
}

/// An ordered grouping of `0..len` into contiguous, non-empty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Range<usize>>,
}

impl Partition {
    /// Every category in its own block.
    pub fn identity(len: usize) -> Self {
        Self {
            blocks: (0..len).map(|i| i..i + 1).collect(),
        }
    }

    /// Blocks given by their sizes, in order.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let mut blocks = Vec::with_capacity(sizes.len());
        for &s in sizes {
            if s == 0 {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            blocks.push(start..start + s);
            start += s;
        }
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        Ok(Self { blocks })
    }

    /// Blocks given as explicit 0-based index groups. Groups must be
    /// contiguous, in order, and cover `0..len` exactly.
    pub fn from_groups(groups: &[Vec<usize>], len: usize) -> Result<Self> {
        let mut next = 0;
        let mut blocks = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for (offset, &idx) in g.iter().enumerate() {
                if idx != next + offset {
                    return Err(Error::InvalidPartition(format!(
                        "block {g:?} is not contiguous and ordered"
                    )));
                }
            }
            blocks.push(next..next + g.len());
            next += g.len();
        }
        if next != len {
            return Err(Error::InvalidPartition(format!(
                "blocks cover {next} of {len} categories"
            )));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of categories covered.
    pub fn len(&self) -> usize {
        self.blocks.last().map(|b| b.end).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn check_len(&self, len: usize, axis: &str) -> Result<()> {
        if self.len() != len {
            return Err(Error::InvalidPartition(format!(
                "{axis} partition covers {} categories, table has {len}",
                self.len()
            )));
        }
        Ok(())
    }

    fn aggregate(&self, v: &[f64]) -> Vec<f64> {
        self.blocks.iter().map(|b| v[b.clone()].iter().sum()).collect()
    }

    fn merged_labels(&self, labels: &[String]) -> Vec<String> {
        self.blocks.iter().map(|b| labels[b.clone()].join("+")).collect()
    }
}

/// Sum neighbouring categories. Each output cell is the sum of the input
/// cells in its row block and column block.
pub fn merge_categories(
    t: &ContingencyTable,
    rows: &Partition,
    cols: &Partition,
) -> Result<ContingencyTable> {
    rows.check_len(t.nrows(), "row")?;
    cols.check_len(t.ncols(), "column")?;
    if rows.num_blocks() < 2 || cols.num_blocks() < 2 {
        return Err(Error::InvalidPartition(
            "merged table must be at least 2x2".into(),
        ));
    }
    let counts = merge_counts(t.counts(), rows, cols);
    Ok(ContingencyTable {
        counts,
        row_labels: rows.merged_labels(t.row_labels()),
        col_labels: cols.merged_labels(t.col_labels()),
    })
}

/// Block sums without shape checks; used on raw (possibly negative) arrays.
pub(crate) fn merge_counts(c: &Array2<f64>, rows: &Partition, cols: &Partition) -> Array2<f64> {
    let mut out = Array2::zeros((rows.num_blocks(), cols.num_blocks()));
    for (bi, rb) in rows.blocks().iter().enumerate() {
        for (bj, cb) in cols.blocks().iter().enumerate() {
            let mut s = 0.0;
            for i in rb.clone() {
                for j in cb.clone() {
                    s += c[[i, j]];
                }
            }
            out[[bi, bj]] = s;
        }
    }
    out
}

fn require_positive_total(m: &Marginals) -> Result<()> {
    if m.total <= 0.0 {
        return Err(Error::DegenerateInput("marginals have zero total".into()));
    }
    Ok(())
}

pub(crate) fn random_match_counts(m: &Marginals) -> Array2<f64> {
    let (n, k) = m.dim();
    Array2::from_shape_fn((n, k), |(i, j)| m.row_sums[i] * m.col_sums[j] / m.total)
}

/// Expected table under random matching: the outer product of the
/// marginals divided by the total.
pub fn random_match(m: &Marginals) -> Result<ContingencyTable> {
    require_positive_total(m)?;
    Ok(ContingencyTable::from_counts_unchecked(random_match_counts(m)))
}

/// Greedy top-down perfectly assortative matching.
pub(crate) fn pam_match_counts(m: &Marginals) -> Array2<f64> {
    let (n, k) = m.dim();
    let mut out = Array2::zeros((n, k));
    let mut rows = m.row_sums.clone();
    let mut cols = m.col_sums.clone();
    let (mut i, mut j) = (n, k);
    while i > 0 && j > 0 {
        let (ri, cj) = (rows[i - 1], cols[j - 1]);
        if ri <= cj {
            out[[i - 1, j - 1]] += ri;
            cols[j - 1] = cj - ri;
            rows[i - 1] = 0.0;
            i -= 1;
        } else {
            out[[i - 1, j - 1]] += cj;
            rows[i - 1] = ri - cj;
            cols[j - 1] = 0.0;
            j -= 1;
        }
    }
    out
}

/// Perfectly assortative matching: the highest remaining husband category
/// is repeatedly matched with the highest remaining wife category.
pub fn pam_match(m: &Marginals) -> Result<ContingencyTable> {
    require_positive_total(m)?;
    Ok(ContingencyTable::from_counts_unchecked(pam_match_counts(m)))
}

/// Share of couples on the diagonal.
pub fn homogamy_share(t: &ContingencyTable) -> Result<f64> {
    if !t.is_square() {
        return Err(Error::Shape {
            expected: "square table",
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    Ok(t.counts().diag().sum() / t.total())
}

fn integral_margins(v: &[f64]) -> Result<Vec<u64>> {
    v.iter()
        .map(|x| {
            if (x - x.round()).abs() > 1e-9 {
                Err(Error::DegenerateInput(format!("non-integer marginal {x}")))
            } else {
                Ok(x.round() as u64)
            }
        })
        .collect()
}

/// Every nonnegative integer table with the given marginals.
///
/// The marginals must be integral and their total must not exceed `cap`.
pub fn enumerate_tables(m: &Marginals, cap: u64) -> Result<Vec<ContingencyTable>> {
    let rows = integral_margins(&m.row_sums)?;
    let cols = integral_margins(&m.col_sums)?;
    let total: u64 = rows.iter().sum();
    if total != cols.iter().sum::<u64>() {
        return Err(Error::DegenerateInput("row and column totals differ".into()));
    }
    if total == 0 {
        return Err(Error::DegenerateInput("marginals have zero total".into()));
    }
    if total > cap {
        return Err(Error::ResourceGuard {
            total: total as f64,
            cap: cap as f64,
        });
    }
    let (n, k) = (rows.len(), cols.len());
    let mut out = Vec::new();
    let mut cells = vec![0u64; n * k];
    let mut col_left = cols.clone();
    fill(0, 0, rows[0], &rows, &mut col_left, &mut cells, k, &mut out);
    Ok(out
        .into_iter()
        .map(|c| {
            let counts = Array2::from_shape_vec((n, k), c.into_iter().map(|v| v as f64).collect())
                .expect("shape matches");
            ContingencyTable::from_counts_unchecked(counts)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn fill(
    i: usize,
    j: usize,
    row_left: u64,
    rows: &[u64],
    col_left: &mut [u64],
    cells: &mut [u64],
    k: usize,
    out: &mut Vec<Vec<u64>>,
) {
    let n = rows.len();
    if i == n {
        out.push(cells.to_vec());
        return;
    }
    if j == k - 1 {
        // last column takes the remainder of the row
        if row_left > col_left[j] {
            return;
        }
        cells[i * k + j] = row_left;
        col_left[j] -= row_left;
        if i + 1 == n {
            if col_left.iter().all(|c| *c == 0) {
                out.push(cells.to_vec());
            }
        } else {
            fill(i + 1, 0, rows[i + 1], rows, col_left, cells, k, out);
        }
        col_left[j] += row_left;
        cells[i * k + j] = 0;
        return;
    }
    let room_after: u64 = col_left[j + 1..].iter().sum();
    let lo = row_left.saturating_sub(room_after);
    let hi = row_left.min(col_left[j]);
    for v in lo..=hi {
        cells[i * k + j] = v;
        col_left[j] -= v;
        fill(i, j + 1, row_left - v, rows, col_left, cells, k, out);
        col_left[j] += v;
    }
    cells[i * k + j] = 0;
}
