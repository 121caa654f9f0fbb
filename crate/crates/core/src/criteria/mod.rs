//! The analytical criteria as randomized property checks.
//!
//! Each check draws deterministic random instances, turns every instance
//! into one or more [`Probe`]s and stops at the first probe whose violation
//! exceeds [`VIOLATION_TOL`]. The probe is kept as a replayable witness.

mod perturbation;
mod probe;
mod sampling;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::counterfactual::{ipf_fit, Method};
use crate::error::{Error, Result};
use crate::indicators::{IndicatorTag, Rounding};
use crate::tables::{enumerate_tables, pam_match, ContingencyTable, Marginals, TableWithSingles};

pub use perturbation::{apply_perturbation, perturb_table, MarginalPerturbation, PerturbationKind};
pub use probe::{contract_gap, excess, matrix_gap, merge_with_singles, relative_gap, Probe};

use sampling::Rng8;

/// A replayed probe counts as a counterexample above this gap.
pub const VIOLATION_TOL: f64 = 1e-7;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CriterionId {
    Ac1,
    Ac2,
    Ac3,
    Ac4,
    Ac5,
    Ac5_1,
    Ac5_2,
    Ac5_3,
    Ac6,
    Ac7,
    Ac8_1,
    Ac8_2,
    Ac8_3,
    Ac9,
    Ac10,
    Ac11,
    Ac12,
}

impl CriterionId {
    /// Rows of the indicator matrix.
    pub const INDICATOR_ROWS: [CriterionId; 13] = [
        CriterionId::Ac1,
        CriterionId::Ac2,
        CriterionId::Ac3,
        CriterionId::Ac4,
        CriterionId::Ac5_1,
        CriterionId::Ac5_2,
        CriterionId::Ac5_3,
        CriterionId::Ac6,
        CriterionId::Ac7,
        CriterionId::Ac8_1,
        CriterionId::Ac8_2,
        CriterionId::Ac8_3,
        CriterionId::Ac9,
    ];

    /// Rows of the method matrix.
    pub const METHOD_ROWS: [CriterionId; 14] = [
        CriterionId::Ac1,
        CriterionId::Ac2,
        CriterionId::Ac3,
        CriterionId::Ac4,
        CriterionId::Ac5,
        CriterionId::Ac6,
        CriterionId::Ac7,
        CriterionId::Ac8_1,
        CriterionId::Ac8_2,
        CriterionId::Ac8_3,
        CriterionId::Ac9,
        CriterionId::Ac10,
        CriterionId::Ac11,
        CriterionId::Ac12,
    ];

    pub fn code(self) -> &'static str {
        match self {
            CriterionId::Ac1 => "AC1",
            CriterionId::Ac2 => "AC2",
            CriterionId::Ac3 => "AC3",
            CriterionId::Ac4 => "AC4",
            CriterionId::Ac5 => "AC5",
            CriterionId::Ac5_1 => "AC5.1",
            CriterionId::Ac5_2 => "AC5.2",
            CriterionId::Ac5_3 => "AC5.3",
            CriterionId::Ac6 => "AC6",
            CriterionId::Ac7 => "AC7",
            CriterionId::Ac8_1 => "AC8.1",
            CriterionId::Ac8_2 => "AC8.2",
            CriterionId::Ac8_3 => "AC8.3",
            CriterionId::Ac9 => "AC9",
            CriterionId::Ac10 => "AC10",
            CriterionId::Ac11 => "AC11",
            CriterionId::Ac12 => "AC12",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CriterionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = CriterionId::METHOD_ROWS
            .into_iter()
            .chain(CriterionId::INDICATOR_ROWS);
        let mut found = None;
        for c in all {
            if c.code().eq_ignore_ascii_case(s) {
                found = Some(c);
            }
        }
        found.ok_or_else(|| Error::Config(format!("unknown criterion {s:?}")))
    }
}

/// What a criterion is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Subject {
    Indicator(IndicatorTag),
    Method(Method),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Indicator(t) => write!(f, "{}", t.name()),
            Subject::Method(m) => write!(f, "{}", m.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SatisfiedOnSample,
    CounterexampleFound,
    NotApplicable,
    NotAutomated,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::SatisfiedOnSample => "satisfied-on-sample",
            Verdict::CounterexampleFound => "counterexample-found",
            Verdict::NotApplicable => "not-applicable",
            Verdict::NotAutomated => "not-automated",
        }
    }

    /// Table-style code: `Y`, `N`, `NA` or `-`.
    pub fn code(self) -> &'static str {
        match self {
            Verdict::SatisfiedOnSample => "Y",
            Verdict::CounterexampleFound => "N",
            Verdict::NotApplicable => "NA",
            Verdict::NotAutomated => "-",
        }
    }
}

/// A cell of the published criteria tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PublishedCell {
    Yes,
    No,
    NotApplicable,
    Blank,
}

impl PublishedCell {
    fn parse(code: &str) -> Self {
        match code {
            "Y" => PublishedCell::Yes,
            "N" => PublishedCell::No,
            "NA" => PublishedCell::NotApplicable,
            _ => PublishedCell::Blank,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            PublishedCell::Yes => "Y",
            PublishedCell::No => "N",
            PublishedCell::NotApplicable => "NA",
            PublishedCell::Blank => "",
        }
    }
}

/// Published verdicts for indicators I1..I10.
const PAPER_INDICATORS: [(CriterionId, [&str; 10]); 13] = [
    (CriterionId::Ac1, ["Y", "Y", "Y", "Y", "Y", "Y", "N", "N", "N", "N"]),
    (CriterionId::Ac2, ["Y"; 10]),
    (CriterionId::Ac3, ["Y", "Y", "Y", "Y", "N", "Y", "Y", "Y", "Y", "Y"]),
    (CriterionId::Ac4, ["Y", "Y", "Y", "Y", "Y", "N", "Y", "NA", "Y", "N"]),
    (CriterionId::Ac5_1, ["Y", "N", "N", "N", "N", "N", "N", "N", "N", "N"]),
    (CriterionId::Ac5_2, ["N", "N", "N", "N", "N", "Y", "N", "N", "N", "N"]),
    (CriterionId::Ac5_3, ["N", "Y", "Y", "Y", "Y", "N", "Y", "Y", "Y", "Y"]),
    (CriterionId::Ac6, ["Y", "Y", "Y", "Y", "", "", "Y", "", "Y", "Y"]),
    (CriterionId::Ac7, ["Y", "N", "N", "N", "", "", "Y", "", "Y", "Y"]),
    (CriterionId::Ac8_1, ["Y"; 10]),
    (CriterionId::Ac8_2, ["N", "N", "N", "N", "N", "N", "Y", "", "Y", "Y"]),
    (CriterionId::Ac8_3, ["NA"; 10]),
    (CriterionId::Ac9, ["NA"; 10]),
];

/// Published verdicts for IPF, MDbA, MEDA, CSA, NM.
const PAPER_METHODS: [(CriterionId, [&str; 5]); 14] = [
    (CriterionId::Ac1, ["Y"; 5]),
    (CriterionId::Ac2, ["Y"; 5]),
    (CriterionId::Ac3, ["Y"; 5]),
    (CriterionId::Ac4, ["Y", "Y", "Y", "Y", "N"]),
    (CriterionId::Ac5, ["Y"; 5]),
    (CriterionId::Ac6, ["", "", "", "", "Y"]),
    (CriterionId::Ac7, ["", "", "", "", "Y"]),
    (CriterionId::Ac8_1, ["Y"; 5]),
    (CriterionId::Ac8_2, ["N", "NA", "NA", "NA", "Y"]),
    (CriterionId::Ac8_3, ["NA", "NA", "NA", "N", "NA"]),
    (CriterionId::Ac9, ["NA", "NA", "NA", "N", "NA"]),
    (CriterionId::Ac10, ["N", "N", "N", "N", "Y"]),
    (CriterionId::Ac11, ["N"; 5]),
    (CriterionId::Ac12, ["N", "", "", "N", "Y"]),
];

/// The published verdict for a criterion/subject pair.
pub fn published_verdict(criterion: CriterionId, subject: Subject) -> PublishedCell {
    match subject {
        Subject::Indicator(tag) => {
            let col = IndicatorTag::ALL.iter().position(|t| *t == tag).unwrap_or(0);
            PAPER_INDICATORS
                .iter()
                .find(|(c, _)| *c == criterion)
                .map(|(_, row)| PublishedCell::parse(row[col]))
                .unwrap_or(PublishedCell::Blank)
        }
        Subject::Method(m) => {
            let col = match m {
                Method::Ipf => 0,
                Method::Mdba => 1,
                Method::Meda => 2,
                Method::Csa => 3,
                Method::Nm(_) => 4,
            };
            PAPER_METHODS
                .iter()
                .find(|(c, _)| *c == criterion)
                .map(|(_, row)| PublishedCell::parse(row[col]))
                .unwrap_or(PublishedCell::Blank)
        }
    }
}

/// An offending instance and the size of its violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub probe: Probe,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub subject: Subject,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Admissible instances examined.
    pub sample_size: usize,
    pub note: Option<String>,
}

impl CriterionReport {
    fn fixed(criterion: CriterionId, subject: Subject, verdict: Verdict, note: impl Into<String>) -> Self {
        CriterionReport {
            criterion,
            subject,
            verdict,
            witness: None,
            sample_size: 0,
            note: Some(note.into()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn published(&self) -> PublishedCell {
        published_verdict(self.criterion, self.subject)
    }

    /// `None` when the published table leaves the cell blank or the check is not automated.
    pub fn agrees_with_published(&self) -> Option<bool> {
        let published = self.published();
        if published == PublishedCell::Blank || self.verdict == Verdict::NotAutomated {
            return None;
        }
        Some(matches!(
            (published, self.verdict),
            (PublishedCell::Yes, Verdict::SatisfiedOnSample)
                | (PublishedCell::No, Verdict::CounterexampleFound)
                | (PublishedCell::NotApplicable, Verdict::NotApplicable)
        ))
    }
}

/// Draw instances until `sample_count` admissible ones pass or one fails.
fn search<F>(criterion: CriterionId, subject: Subject, sample_count: usize, seed: u64, mut draw: F) -> CriterionReport
where
    F: FnMut(&mut Rng8, usize) -> Vec<Probe>,
{
    let mut rng = Rng8::seed_from_u64(seed);
    let budget = sample_count.saturating_mul(50).max(100);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < sample_count && attempts < budget {
        attempts += 1;
        let mut admissible = false;
        for probe in draw(&mut rng, accepted) {
            let Ok(v) = probe.violation() else { continue };
            if v.is_nan() {
                continue;
            }
            admissible = true;
            if v > VIOLATION_TOL {
                return CriterionReport {
                    criterion,
                    subject,
                    verdict: Verdict::CounterexampleFound,
                    witness: Some(Witness { probe, violation: v }),
                    sample_size: accepted + 1,
                    note: None,
                };
            }
        }
        if admissible {
            accepted += 1;
        }
    }
    let mut report = CriterionReport {
        criterion,
        subject,
        verdict: Verdict::SatisfiedOnSample,
        witness: None,
        sample_size: accepted,
        note: None,
    };
    if accepted == 0 {
        report.verdict = Verdict::NotApplicable;
        report.note = Some("no admissible instance was drawn".into());
    } else if accepted < sample_count {
        report.note = Some(format!("only {accepted} admissible instances in {attempts} draws"));
    }
    report
}

/// Table sizes an indicator is exercised on for size-agnostic criteria.
fn sizes(tag: IndicatorTag) -> &'static [usize] {
    match tag {
        IndicatorTag::Determinant | IndicatorTag::SurplusMatrix | IndicatorTag::GeneralizedLiuLu => &[2, 3],
        _ => &[2],
    }
}

fn rotate(t: &TableWithSingles) -> TableWithSingles {
    let c = t.couples().counts();
    let rotated = Array2::from_shape_fn(c.dim(), |(i, j)| c[[c.nrows() - 1 - i, c.ncols() - 1 - j]]);
    let mut men = t.single_men().to_vec();
    let mut women = t.single_women().to_vec();
    men.reverse();
    women.reverse();
    TableWithSingles::from_parts_unchecked(t.couples().with_counts_unchecked(rotated), men, women)
}

fn same_singles(t: &TableWithSingles, couples: ContingencyTable) -> TableWithSingles {
    TableWithSingles::from_parts_unchecked(couples, t.single_men().to_vec(), t.single_women().to_vec())
}

fn perturbed(t: &TableWithSingles, kind: PerturbationKind, alpha: f64) -> Option<TableWithSingles> {
    let p = MarginalPerturbation::new(kind, alpha).ok()?;
    apply_perturbation(t, &p).ok()
}

/// PAM maximality against every integer table with the same marginals.
fn max_probes(tag: IndicatorTag, rng: &mut Rng8, candidate: ContingencyTable) -> Vec<Probe> {
    let cand = sampling::with_singles(rng, candidate);
    let Ok(rivals) = enumerate_tables(&cand.couples().marginals(), 40) else {
        return Vec::new();
    };
    rivals
        .into_iter()
        .map(|r| Probe::AtMost {
            indicator: tag,
            lower: same_singles(&cand, r),
            upper: cand.clone(),
        })
        .collect()
}

fn total_cap(n: usize) -> u32 {
    if n == 2 {
        20
    } else {
        12
    }
}

/// Check one criterion against one indicator.
pub fn check_indicator(criterion: CriterionId, tag: IndicatorTag, sample_count: usize, seed: u64) -> CriterionReport {
    use CriterionId::*;
    let subject = Subject::Indicator(tag);
    let published = published_verdict(criterion, subject);
    match criterion {
        Ac1 => {
            return CriterionReport::fixed(
                criterion,
                subject,
                Verdict::NotAutomated,
                format!("metadata lookup: cardinal = {}", published.code()),
            )
        }
        Ac8_2 => {
            return CriterionReport::fixed(
                criterion,
                subject,
                Verdict::NotAutomated,
                "requires intergenerational mobility tables",
            )
        }
        Ac8_3 | Ac9 => {
            return CriterionReport::fixed(
                criterion,
                subject,
                Verdict::NotApplicable,
                "direct indicators do not distinguish voluntary and involuntary singles",
            )
        }
        Ac5 | Ac10 | Ac11 | Ac12 => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, "method criterion")
        }
        Ac4 if tag == IndicatorTag::SurplusMatrix => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, "category symmetry is not defined for the surplus matrix")
        }
        Ac6 | Ac7 if tag == IndicatorTag::SurplusMatrix => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, "the surplus matrix has no maximum over tables")
        }
        _ => {}
    }

    let sz = sizes(tag);
    let report = search(criterion, subject, sample_count, seed, |rng, i| {
        let n = sz[i % sz.len()];
        match criterion {
            Ac2 => {
                let t = sampling::observed(rng, n, n);
                let r = rng.gen_range(0.1..10.0);
                vec![Probe::Equal {
                    indicator: tag,
                    rhs: t.scaled(r),
                    lhs: t,
                    transpose_rhs: false,
                }]
            }
            Ac3 => {
                let t = sampling::observed(rng, n, n);
                vec![Probe::Equal {
                    indicator: tag,
                    rhs: t.transpose(),
                    lhs: t,
                    transpose_rhs: tag.is_matrix(),
                }]
            }
            Ac4 => {
                let t = sampling::observed(rng, 2, 2);
                vec![Probe::Equal {
                    indicator: tag,
                    rhs: rotate(&t),
                    lhs: t,
                    transpose_rhs: false,
                }]
            }
            Ac5_1 | Ac5_2 => {
                let t = sampling::observed(rng, 2, 2);
                let (kinds, alpha) = if criterion == Ac5_1 {
                    ([PerturbationKind::Type1Row, PerturbationKind::Type1Col], rng.gen_range(0.2..5.0))
                } else {
                    ([PerturbationKind::Type2Row, PerturbationKind::Type2Col], rng.gen_range(0.05..0.95))
                };
                kinds
                    .into_iter()
                    .filter_map(|k| perturbed(&t, k, alpha))
                    .map(|rhs| Probe::Equal {
                        indicator: tag,
                        lhs: t.clone(),
                        rhs,
                        transpose_rhs: false,
                    })
                    .collect()
            }
            Ac5_3 => {
                let t = sampling::observed(rng, n, n);
                let other = sampling::table(rng, n, n).marginals();
                match ipf_fit(t.couples(), &other, 1e-10, 10_000) {
                    Ok(fit) => vec![Probe::Equal {
                        indicator: tag,
                        rhs: same_singles(&t, fit.table),
                        lhs: t,
                        transpose_rhs: false,
                    }],
                    Err(_) => Vec::new(),
                }
            }
            Ac6 => {
                let total = rng.gen_range(2..=total_cap(n));
                let rows = sampling::composition(rng, n, total);
                let diag = Array2::from_diag(&ndarray::Array1::from(rows));
                match ContingencyTable::new(diag, labels(n), labels(n)) {
                    Ok(c) => max_probes(tag, rng, c),
                    Err(_) => Vec::new(),
                }
            }
            Ac7 => {
                let total = rng.gen_range(2..=total_cap(n));
                let rows = sampling::composition(rng, n, total);
                let cols = sampling::composition(rng, n, total);
                match Marginals::new(rows, cols).and_then(|m| pam_match(&m)) {
                    Ok(c) => max_probes(tag, rng, c),
                    Err(_) => Vec::new(),
                }
            }
            Ac8_1 => {
                let t = sampling::observed(rng, n, n);
                let mut raised = t.couples().counts().clone();
                for (k, v) in sampling::diagonal(rng, n).into_iter().enumerate() {
                    raised[[k, k]] += v;
                }
                let upper = same_singles(&t, t.couples().with_counts_unchecked(raised));
                vec![Probe::AtMost {
                    indicator: tag,
                    lower: t,
                    upper,
                }]
            }
            _ => Vec::new(),
        }
    });
    if criterion == Ac5_3 {
        report.with_note("interpretation: immunity to IPF raking of the marginals")
    } else {
        report
    }
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// The method columns of the criteria matrix.
pub const METHOD_SUBJECTS: [Method; 6] = [
    Method::Ipf,
    Method::Mdba,
    Method::Meda,
    Method::Csa,
    Method::Nm(Rounding::Integer),
    Method::Nm(Rounding::Continuous),
];

/// Source `[[1,49],[49,1]]` has strongly negative sorting that cannot be
/// kept at target marginals `(20,80)` / `(20,80)`.
pub fn impossible_counterfactual() -> (TableWithSingles, TableWithSingles) {
    let source = TableWithSingles::new(
        ContingencyTable::from_rows(&[[1., 49.], [49., 1.]]).expect("valid"),
        vec![10., 10.],
        vec![10., 10.],
    )
    .expect("valid");
    let target = TableWithSingles::new(
        ContingencyTable::from_rows(&[[4., 16.], [16., 64.]]).expect("valid"),
        vec![10., 10.],
        vec![10., 10.],
    )
    .expect("valid");
    (source, target)
}

/// Check one criterion against one counterfactual method.
pub fn check_method(criterion: CriterionId, method: Method, sample_count: usize, seed: u64) -> CriterionReport {
    use CriterionId::*;
    let subject = Subject::Method(method);
    let published = published_verdict(criterion, subject);
    match criterion {
        Ac1 => {
            return CriterionReport::fixed(
                criterion,
                subject,
                Verdict::NotAutomated,
                format!("metadata lookup: cardinal = {}", published.code()),
            )
        }
        Ac4 | Ac6 | Ac7 | Ac8_2 | Ac11 => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotAutomated, "not automated for methods")
        }
        Ac8_3 | Ac9 if method == Method::Csa => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotAutomated, "requires voluntary/involuntary singles data")
        }
        Ac8_3 | Ac9 | Ac5_1 | Ac5_2 | Ac5_3 => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, "not defined for this method")
        }
        Ac10 if method == Method::Mdba => {
            return CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, "MDbA is defined for 2x2 tables only")
        }
        Ac12 => {
            let (source, target) = impossible_counterfactual();
            let probe = Probe::MethodSignal {
                method,
                source,
                target,
            };
            return match probe.violation() {
                Ok(v) if v > VIOLATION_TOL => CriterionReport {
                    criterion,
                    subject,
                    verdict: Verdict::CounterexampleFound,
                    witness: Some(Witness { probe, violation: v }),
                    sample_size: 1,
                    note: Some("no infeasibility signal on the crafted case".into()),
                },
                Ok(_) => CriterionReport {
                    criterion,
                    subject,
                    verdict: Verdict::SatisfiedOnSample,
                    witness: None,
                    sample_size: 1,
                    note: Some("infeasibility raised on the crafted case".into()),
                },
                Err(e) => CriterionReport::fixed(criterion, subject, Verdict::NotApplicable, e.to_string()),
            };
        }
        _ => {}
    }

    let n = if method == Method::Mdba { 2 } else { 3 };
    search(criterion, subject, sample_count, seed, |rng, i| {
        let source = sampling::observed(rng, n, n);
        let target = sampling::observed(rng, n, n);
        match criterion {
            Ac2 => vec![Probe::MethodScale {
                method,
                source,
                target,
                r: rng.gen_range(0.1..10.0),
            }],
            Ac3 => vec![Probe::MethodTranspose { method, source, target }],
            Ac5 => vec![Probe::MethodContract { method, source, target }],
            Ac8_1 => vec![Probe::MethodDiagonal {
                method,
                diagonal: sampling::diagonal(rng, n),
                source,
                target,
            }],
            Ac10 => {
                let rows = if i % 2 == 0 { 3 } else { 4 };
                let source = sampling::observed(rng, rows, 3);
                let target = sampling::observed(rng, rows, 3);
                vec![Probe::MethodMerge {
                    method,
                    rows: sampling::coarsening(rng, rows),
                    cols: sampling::coarsening(rng, 3),
                    source,
                    target,
                }]
            }
            _ => Vec::new(),
        }
    })
}

/// All indicator checks, row-major over [`CriterionId::INDICATOR_ROWS`].
pub fn indicator_matrix(sample_count: usize, seed: u64) -> Vec<CriterionReport> {
    CriterionId::INDICATOR_ROWS
        .iter()
        .flat_map(|c| IndicatorTag::ALL.iter().map(move |t| check_indicator(*c, *t, sample_count, seed)))
        .collect()
}

/// All method checks, row-major over [`CriterionId::METHOD_ROWS`].
pub fn method_matrix(sample_count: usize, seed: u64) -> Vec<CriterionReport> {
    CriterionId::METHOD_ROWS
        .iter()
        .flat_map(|c| METHOD_SUBJECTS.iter().map(move |m| check_method(*c, *m, sample_count, seed)))
        .collect()
}
