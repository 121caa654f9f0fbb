#![allow(dead_code)]

use homlab::{ContingencyTable, TableWithSingles};
use proptest::prelude::*;

pub fn table(rows: &[Vec<f64>]) -> ContingencyTable {
    ContingencyTable::from_rows(rows).unwrap()
}

/// `n x m` tables of integer counts in `lo..=hi`.
pub fn counts(n: usize, m: usize, lo: u32, hi: u32) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((lo..=hi).prop_map(f64::from), m), n)
}

pub fn tables(n: usize, m: usize, lo: u32, hi: u32) -> impl Strategy<Value = ContingencyTable> {
    counts(n, m, lo, hi)
        .prop_filter("nonzero", |r| r.iter().flatten().any(|v| *v > 0.0))
        .prop_map(|r| table(&r))
}

pub fn with_singles(n: usize) -> impl Strategy<Value = TableWithSingles> {
    (
        counts(n, n, 1, 50),
        prop::collection::vec((1u32..=50).prop_map(f64::from), n),
        prop::collection::vec((1u32..=50).prop_map(f64::from), n),
    )
        .prop_map(|(c, m, w)| TableWithSingles::new(table(&c), m, w).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}
