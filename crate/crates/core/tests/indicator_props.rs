mod common;

use common::{rel, table, tables, with_singles};
use homlab::indicators::{
    aggregate_msp, correlation, covariance, determinant, gll_with, ll_cells, ll_simplified,
    odds_ratio, regression, surplus_matrix, v_value, IndicatorTag, Rounding,
};
use homlab::tables::{enumerate_tables, homogamy_share, pam_match};
use homlab::ContingencyTable;
use proptest::prelude::*;

fn positive_2x2() -> impl Strategy<Value = ContingencyTable> {
    tables(2, 2, 1, 60)
}

fn cells(t: &ContingencyTable) -> [f64; 4] {
    t.cells_2x2().unwrap()
}

fn rotate(t: &ContingencyTable) -> ContingencyTable {
    let [a, b, c, d] = cells(t);
    table(&[vec![d, c], vec![b, a]])
}

proptest! {
    #[test]
    fn scale_behaviour(t in positive_2x2(), r in 0.1f64..20.0) {
        let s = t.scaled(r);
        for f in [odds_ratio, correlation, covariance, v_value] {
            prop_assert!(rel(f(&s).unwrap(), f(&t).unwrap()) < 1e-10);
        }
        prop_assert!(rel(regression(&s).unwrap().beta_wm, regression(&t).unwrap().beta_wm) < 1e-10);
        prop_assert!(rel(aggregate_msp(&s).unwrap().aggregate, aggregate_msp(&t).unwrap().aggregate) < 1e-10);
        prop_assert!(rel(determinant(&s).unwrap(), r * r * determinant(&t).unwrap()) < 1e-10);
        let ll = |x: &ContingencyTable| ll_cells(cells(x), Rounding::Continuous).map(|d| d.value);
        if let (Ok(a), Ok(b)) = (ll(&s), ll(&t)) {
            prop_assert!(rel(a, b) < 1e-9);
        }
    }

    #[test]
    fn gender_symmetry(t in positive_2x2()) {
        let tt = t.transpose();
        for f in [odds_ratio, determinant, covariance, correlation, v_value] {
            prop_assert!(rel(f(&tt).unwrap(), f(&t).unwrap()) < 1e-12);
        }
        prop_assert!(rel(aggregate_msp(&tt).unwrap().aggregate, aggregate_msp(&t).unwrap().aggregate) < 1e-12);
        prop_assert!(rel(regression(&tt).unwrap().beta_wm, regression(&t).unwrap().beta_mw) < 1e-12);
        if let (Ok(a), Ok(b)) = (ll_simplified(&tt), ll_simplified(&t)) {
            prop_assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn category_symmetry(t in positive_2x2()) {
        let r = rotate(&t);
        for f in [odds_ratio, determinant, covariance, correlation, v_value] {
            prop_assert!(rel(f(&r).unwrap(), f(&t).unwrap()) < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (ll_simplified(&r), ll_simplified(&t)) {
            prop_assert!(rel(a.value, b.value) < 1e-12);
        }
        // The aggregate MSP is symmetric as well: both local terms swap.
        prop_assert!(rel(aggregate_msp(&r).unwrap().aggregate, aggregate_msp(&t).unwrap().aggregate) < 1e-12);
    }

    #[test]
    fn determinant_family_signs_agree(t in tables(2, 2, 0, 40)) {
        let [a, b, c, d] = cells(&t);
        let s = (a * d - b * c).signum();
        let det = determinant(&t).unwrap();
        prop_assert_eq!(det.signum() * (det != 0.0) as i32 as f64, s * (a * d != b * c) as i32 as f64);
        if let Ok(v) = covariance(&t) { prop_assert!(v == 0.0 || v.signum() == s); }
        if let Ok(v) = correlation(&t) { prop_assert!(v == 0.0 || v.signum() == s); }
        if let Ok(v) = regression(&t) {
            prop_assert!(v.beta_wm == 0.0 || v.beta_wm.signum() == s);
            prop_assert!(v.beta_mw == 0.0 || v.beta_mw.signum() == s);
        }
        if let Ok(v) = v_value(&t) { prop_assert!(v == 0.0 || v.signum() == s); }
    }

    #[test]
    fn correlation_is_bounded(t in positive_2x2()) {
        let r = correlation(&t).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
    }

    #[test]
    fn monotone_in_diagonal(t in positive_2x2(), da in 1u32..30, dd in 1u32..30) {
        let [a, b, c, d] = cells(&t);
        let u = table(&[vec![a + da as f64, b], vec![c, d + dd as f64]]);
        for f in [odds_ratio, determinant, correlation, v_value] {
            prop_assert!(f(&u).unwrap() >= f(&t).unwrap() - 1e-12);
        }
        prop_assert!(regression(&u).unwrap().beta_wm >= regression(&t).unwrap().beta_wm - 1e-12);
        prop_assert!(aggregate_msp(&u).unwrap().aggregate >= aggregate_msp(&t).unwrap().aggregate - 1e-12);
        if let (Ok(x), Ok(y)) = (ll_simplified(&u), ll_simplified(&t)) {
            prop_assert!(x.value >= y.value - 1e-12);
        }
    }

    #[test]
    fn gll_of_2x2_is_ll(t in positive_2x2()) {
        for rounding in [Rounding::Integer, Rounding::Continuous] {
            let g = gll_with(&t, rounding);
            prop_assert_eq!(g.dim(), (1, 1));
            let e = g.entry(1, 1).clone().map(|d| d.value);
            prop_assert_eq!(e, ll_cells(cells(&t), rounding).map(|d| d.value));
        }
    }

    #[test]
    fn gll_entries_are_split_ll(t in tables(3, 4, 1, 30)) {
        let g = gll_with(&t, Rounding::Continuous);
        let c = t.counts();
        for j in 1..3 {
            for k in 1..4 {
                let mut agg = [0.0; 4];
                for ((i, l), v) in c.indexed_iter() {
                    agg[2 * (i >= j) as usize + (l >= k) as usize] += v;
                }
                let want = ll_cells(agg, Rounding::Continuous).map(|d| d.value);
                prop_assert_eq!(g.entry(j, k).clone().map(|d| d.value), want);
            }
        }
    }

    #[test]
    fn surplus_matrix_transposes(t in with_singles(3)) {
        let a = surplus_matrix(&t).unwrap().values;
        let b = surplus_matrix(&t.transpose()).unwrap().values;
        prop_assert_eq!(a.t().to_owned(), b);
    }

    #[test]
    fn tags_round_trip(i in 0usize..10) {
        let tag = IndicatorTag::ALL[i];
        prop_assert_eq!(tag.name().parse::<IndicatorTag>().unwrap(), tag);
        prop_assert_eq!(tag.code().parse::<IndicatorTag>().unwrap(), tag);
    }
}

#[test]
fn covariance_can_fall_when_a_diagonal_cell_grows() {
    let t = table(&[vec![10., 0.], vec![0., 1.]]);
    let u = table(&[vec![20., 0.], vec![0., 1.5]]);
    assert!(covariance(&u).unwrap() < covariance(&t).unwrap());
}

#[test]
fn paper_rounding_breaks_scale_invariance() {
    // R = 20*40/100 = 8 exactly, but at scale 1.05 R = 8.4 and int() drops
    // 0.4 while d scales to 21.
    let t = table(&[vec![50., 10.], vec![30., 10.]]);
    let a = ll_simplified(&t).unwrap().value;
    let b = ll_simplified(&t.scaled(1.05)).unwrap().value;
    assert!((a - b).abs() > 1e-3);
}

#[test]
fn homogamy_below_pam_on_all_small_enumerations() {
    for total in 1..=20u32 {
        for r0 in 0..=total {
            for c0 in 0..=total {
                let m = homlab::Marginals::new(
                    vec![r0 as f64, (total - r0) as f64],
                    vec![c0 as f64, (total - c0) as f64],
                )
                .unwrap();
                let pam = homogamy_share(&pam_match(&m).unwrap()).unwrap();
                for t in enumerate_tables(&m, 40).unwrap() {
                    assert!(homogamy_share(&t).unwrap() <= pam + 1e-12);
                }
            }
        }
    }
}
