use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::tables::{ContingencyTable, Partition, TableWithSingles};

pub(crate) type Rng8 = ChaCha8Rng;

/// Integer cells uniform on `[0, 50]`, redrawn until the total is positive.
pub(crate) fn table(rng: &mut Rng8, n: usize, m: usize) -> ContingencyTable {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0..=50) as f64).collect())
            .collect();
        if let Ok(t) = ContingencyTable::from_rows(&rows) {
            return t;
        }
    }
}

/// Singles counts uniform on `[1, 50]`.
pub(crate) fn with_singles(rng: &mut Rng8, t: ContingencyTable) -> TableWithSingles {
    let (n, m) = t.dim();
    let men = (0..n).map(|_| rng.gen_range(1..=50) as f64).collect();
    let women = (0..m).map(|_| rng.gen_range(1..=50) as f64).collect();
    TableWithSingles::new(t, men, women).expect("valid by construction")
}

pub(crate) fn observed(rng: &mut Rng8, n: usize, m: usize) -> TableWithSingles {
    let t = table(rng, n, m);
    with_singles(rng, t)
}

/// A uniformly drawn weak composition of `total` into `parts` integers.
pub(crate) fn composition(rng: &mut Rng8, parts: usize, total: u32) -> Vec<f64> {
    let mut cuts: Vec<u32> = (0..parts - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push((c - prev) as f64);
        prev = c;
    }
    out.push((total - prev) as f64);
    out
}

/// Positive diagonal additions, integers in `[1, 50]`.
pub(crate) fn diagonal(rng: &mut Rng8, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(1..=50) as f64).collect()
}

/// A contiguous partition of `len` categories into at least two blocks and
/// fewer than `len` blocks.
pub(crate) fn coarsening(rng: &mut Rng8, len: usize) -> Partition {
    let blocks = rng.gen_range(2..len);
    let mut cuts: Vec<usize> = (1..len).collect();
    while cuts.len() > blocks - 1 {
        let i = rng.gen_range(0..cuts.len());
        cuts.remove(i);
    }
    let mut sizes = Vec::with_capacity(blocks);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(len)) {
        sizes.push(c - prev);
        prev = c;
    }
    Partition::from_sizes(&sizes).expect("valid by construction")
}
