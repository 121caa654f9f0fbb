use ndarray::Zip;

use super::{check_target, settle_cells, CounterfactualResult, Method};
use crate::error::{Error, Result};
use crate::tables::{pam_match_counts, random_match_counts, ContingencyTable, Marginals};

/// Weight `v` of the point on the line through random matching `R` and PAM
/// `P` (at the source's own marginals) that is closest to the source `S`:
/// `v = <S - R, P - R> / |P - R|^2`. Not clamped.
pub fn meda_weight(source: &ContingencyTable) -> Result<f64> {
    let m = source.marginals();
    let r = random_match_counts(&m);
    let p = pam_match_counts(&m);
    let mut num = 0.0;
    let mut den = 0.0;
    Zip::from(source.counts())
        .and(&r)
        .and(&p)
        .for_each(|s, r, p| {
            num += (s - r) * (p - r);
            den += (p - r) * (p - r);
        });
    let n = m.total();
    if den <= 1e-24 * n * n {
        return Err(Error::UndefinedWeight(
            "random and PAM matchings coincide for the source marginals".into(),
        ));
    }
    Ok(num / den)
}

/// Blend `(1 - v) * random(target) + v * pam(target)` with the source's `v`.
pub fn meda_fit(source: &ContingencyTable, target: &Marginals) -> Result<CounterfactualResult> {
    check_target(source, target)?;
    let v = meda_weight(source)?;
    let r = random_match_counts(target);
    let p = pam_match_counts(target);
    let blend = Zip::from(&r).and(&p).map_collect(|r, p| (1.0 - v) * r + v * p);
    let counts = settle_cells(blend, target.total(), &format!("MEDA with v = {v}"))?;
    Ok(
        CounterfactualResult::new(source.with_counts_unchecked(counts), Method::Meda, target)
            .with_diag("v", v),
    )
}
