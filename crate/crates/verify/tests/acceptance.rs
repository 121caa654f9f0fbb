//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! Oracles are computed here from first principles (exact integer
//! arithmetic, brute-force search, hand-set signs) rather than through the
//! library's own helpers.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use homlab::counterfactual::{fit_observed, meda_fit, meda_weight, nm_fit, FitOptions, Method};
use homlab::criteria::{
    indicator_matrix, method_matrix, CriterionId, CriterionReport, Subject, Verdict,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
use homlab::decomposition::{decompose_observed, Scheme};
use homlab::indicators::{ll_simplified, v_value, IndicatorTag, Rounding};
use homlab::io::{load_couples, CouplesSpec};
use homlab::panel::{CategoryScheme, IncomePanel, PanelDataset};
use homlab::tables::{ContingencyTable, Marginals, TableWithSingles};
use homlab::trend::{classify_u_shape, decade_changes, score, Measure, ALPHA_BOUNDARY};

const LL_V_INSTANCES: usize = 1000;
const LL_V_TOL: f64 = 1e-12;
const LL_V_BUDGET: Duration = Duration::from_secs(1);

const CONTRACT_INSTANCES: usize = 200;
const MARGINAL_TOL: f64 = 1e-9;
const FACTOR_TOL: f64 = 1e-9;
const FIXPOINT_TOL: f64 = 1e-9;
const CONTRACT_BUDGET: Duration = Duration::from_secs(30);

const COINCIDENCE_INSTANCES: usize = 200;
const COINCIDENCE_TOL: f64 = 1e-9;
const BRUTE_FORCE_INSTANCES: usize = 20;

const ADDITIVITY_INSTANCES: usize = 200;
const ADDITIVITY_TOL: f64 = 1e-12;

/// Published n_U/N and N for NM (three levels), LL (college cut), LL (high
/// school cut).
const DATASET_TARGETS: [(&str, f64, usize); 3] =
    [("nm three-level", 0.84, 240), ("ll college", 0.75, 239), ("ll hs", 0.73, 236)];
const DATASET_RATIO_TOL: f64 = 0.02;
const DATASET_N_TOL: usize = 2;
const DATASET_ENV: &str = "HOMLAB_COUPLES";

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            status: Status::Pass,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.details
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
        if !ok {
            self.status = Status::Fail;
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.details.push(format!("     {}", line.into()));
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn table(rows: Vec<Vec<f64>>) -> ContingencyTable {
    ContingencyTable::from_rows(&rows).unwrap()
}

fn random_rows(r: &mut ChaCha8Rng, n: usize, m: usize, lo: u32, hi: u32) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| r.gen_range(lo..=hi) as f64).collect())
        .collect()
}

fn margins(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let r: Vec<f64> = rows.iter().map(|x| x.iter().sum()).collect();
    let c: Vec<f64> = (0..rows[0].len()).map(|j| rows.iter().map(|x| x[j]).sum()).collect();
    (r, c)
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// `(c+d)(b+d)` divisible by `N` and `d >= R`, in exact integers.
fn integer_r_nonnegative(a: i64, b: i64, c: i64, d: i64) -> bool {
    let n = a + b + c + d;
    n > 0 && ((c + d) * (b + d)) % n == 0 && d * n >= (c + d) * (b + d)
}

fn ll_v_equivalence() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let mut r = rng(11);
    let (mut accepted, mut worst, mut worst_exact) = (0, 0.0f64, 0.0f64);
    while accepted < LL_V_INSTANCES {
        let [a, b, c, d] = [0; 4].map(|_| r.gen_range(0..=60i64));
        if !integer_r_nonnegative(a, b, c, d) {
            continue;
        }
        let n = a + b + c + d;
        let rr = (c + d) * (b + d) / n;
        let dmax = (b + d).min(c + d);
        let denom_v = if b >= c { (c + d) * (a + c) } else { (b + d) * (a + b) };
        if dmax == rr || denom_v == 0 {
            continue;
        }
        let t = table(vec![vec![a as f64, b as f64], vec![c as f64, d as f64]]);
        let ll = ll_simplified(&t).unwrap().value;
        let v = v_value(&t).unwrap();
        // Exact rational LL: (d - R) / (dmax - R) with integer R.
        let exact = (d - rr) as f64 / (dmax - rr) as f64;
        worst = worst.max((ll - v).abs());
        worst_exact = worst_exact.max((ll - exact).abs());
        accepted += 1;
    }
    let elapsed = start.elapsed();
    out.check(
        worst <= LL_V_TOL,
        format!("max |LL - V| = {worst:e} over {accepted} tables (tol {LL_V_TOL:e})"),
    );
    out.check(
        worst_exact <= LL_V_TOL,
        format!("max |LL - exact rational| = {worst_exact:e}"),
    );
    out.check(
        elapsed < LL_V_BUDGET,
        format!("runtime {elapsed:?} (budget {LL_V_BUDGET:?})"),
    );
    out
}

/// Greedy top-down matching of a 2x2 margin pair.
fn pam_2x2(rows: &[f64], cols: &[f64]) -> [f64; 4] {
    let d = rows[1].min(cols[1]);
    let c = rows[1] - d;
    let b = cols[1] - d;
    let a = rows[0] - b;
    [a, b, c, d]
}

fn meda_v_oracle(t: &Array2<f64>) -> f64 {
    let s = [t[[0, 0]], t[[0, 1]], t[[1, 0]], t[[1, 1]]];
    let rows = [s[0] + s[1], s[2] + s[3]];
    let cols = [s[0] + s[2], s[1] + s[3]];
    let n = rows[0] + rows[1];
    let rnd = [rows[0] * cols[0] / n, rows[0] * cols[1] / n, rows[1] * cols[0] / n, rows[1] * cols[1] / n];
    let p = pam_2x2(&rows, &cols);
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..4 {
        num += (s[k] - rnd[k]) * (p[k] - rnd[k]);
        den += (p[k] - rnd[k]) * (p[k] - rnd[k]);
    }
    num / den
}

fn floor_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// GLL entries computed directly from split sums; `None` where undefined.
fn gll_oracle(t: &Array2<f64>) -> Vec<Option<f64>> {
    let (n, m) = t.dim();
    let total: f64 = t.sum();
    let mut out = Vec::new();
    for j in 1..n {
        for k in 1..m {
            let (mut bd, mut cd, mut d) = (0.0, 0.0, 0.0);
            for ((i, l), v) in t.indexed_iter() {
                if l >= k {
                    bd += v;
                }
                if i >= j {
                    cd += v;
                }
                if i >= j && l >= k {
                    d += v;
                }
            }
            let rho = floor_snap(cd * bd / total);
            let den = bd.min(cd) - rho;
            out.push((den.abs() > 1e-12 * total.max(1.0)).then(|| (d - rho) / den));
        }
    }
    out
}

fn local_ors(t: &Array2<f64>) -> Vec<f64> {
    let (n, m) = t.dim();
    let mut v = Vec::new();
    for i in 0..n - 1 {
        for j in 0..m - 1 {
            v.push(t[[i, j]] * t[[i + 1, j + 1]] / (t[[i, j + 1]] * t[[i + 1, j]]));
        }
    }
    v
}

fn det2(t: &Array2<f64>) -> f64 {
    t[[0, 0]] * t[[1, 1]] - t[[0, 1]] * t[[1, 0]]
}

fn msm(couples: &Array2<f64>, men: &[f64], women: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn(couples.dim(), |(i, j)| couples[[i, j]] / (men[i] * women[j]).sqrt())
}

struct ContractStats {
    feasible: usize,
    marginal: f64,
    factor: f64,
    fixpoint: f64,
}

fn contract_for(method: Method, seed: u64) -> ContractStats {
    let opts = FitOptions::default();
    let dim = match method {
        Method::Mdba | Method::Meda => 2,
        _ => 3,
    };
    let mut r = rng(seed);
    let mut stats = ContractStats {
        feasible: 0,
        marginal: 0.0,
        factor: 0.0,
        fixpoint: 0.0,
    };
    let mut attempts = 0;
    while stats.feasible < CONTRACT_INSTANCES && attempts < 50 * CONTRACT_INSTANCES {
        attempts += 1;
        let src_rows = random_rows(&mut r, dim, dim, 1, 50);
        let tgt_rows = random_rows(&mut r, dim, dim, 1, 50);
        let singles = |r: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| r.gen_range(1..=50) as f64).collect() };
        let src = TableWithSingles::new(table(src_rows.clone()), singles(&mut r), singles(&mut r)).unwrap();
        let tgt = TableWithSingles::new(table(tgt_rows.clone()), singles(&mut r), singles(&mut r)).unwrap();
        let Ok(res) = fit_observed(method, &src, &tgt, &opts) else {
            continue;
        };
        stats.feasible += 1;
        let out = res.table.counts().clone();
        let s = src.couples().counts();
        let total_t: f64 = tgt_rows.iter().flatten().sum();
        let (tr, tc) = margins(&tgt_rows);
        let (or, oc) = margins(&out.rows().into_iter().map(|x| x.to_vec()).collect::<Vec<_>>());

        let (marginal, factor) = match method {
            Method::Csa => {
                let fit = res.singles.as_ref().unwrap();
                let men = tgt.men_population();
                let women = tgt.women_population();
                let scale = men.iter().sum::<f64>().max(1.0);
                let m = (0..dim)
                    .map(|i| (fit.men[i] + or[i] - men[i]).abs().max((fit.women[i] + oc[i] - women[i]).abs()))
                    .fold(0.0, f64::max)
                    / scale;
                let a = msm(&out, &fit.men, &fit.women);
                let b = msm(s, src.single_men(), src.single_women());
                let f = a.iter().zip(&b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max);
                (m, f)
            }
            _ => {
                let m = tr
                    .iter()
                    .zip(&or)
                    .chain(tc.iter().zip(&oc))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / total_t.max(1.0);
                let f = match method {
                    Method::Ipf => local_ors(s)
                        .iter()
                        .zip(local_ors(&out))
                        .map(|(a, b)| rel(*a, b))
                        .fold(0.0, f64::max),
                    Method::Mdba => {
                        let scale = total_t / s.sum();
                        rel(det2(&out), det2(s) * scale * scale)
                    }
                    Method::Meda => rel(meda_v_oracle(&out), meda_v_oracle(s)),
                    Method::Nm(_) => gll_oracle(s)
                        .iter()
                        .zip(gll_oracle(&out))
                        .filter_map(|(a, b)| Some(rel((*a)?, b?)))
                        .fold(0.0, f64::max),
                    Method::Csa => unreachable!(),
                };
                (m, f)
            }
        };
        stats.marginal = stats.marginal.max(marginal);
        stats.factor = stats.factor.max(factor);

        let fixed = fit_observed(method, &src, &src, &opts).expect("fixpoint fit");
        let gap = max_abs_diff(fixed.table.counts(), s) / s.sum().max(1.0);
        stats.fixpoint = stats.fixpoint.max(gap);
    }
    stats
}

fn counterfactual_contracts() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let methods = [
        Method::Ipf,
        Method::Mdba,
        Method::Meda,
        Method::Nm(Rounding::Integer),
        Method::Csa,
    ];
    for (k, m) in methods.iter().enumerate() {
        let s = contract_for(*m, 100 + k as u64);
        out.check(
            s.feasible == CONTRACT_INSTANCES,
            format!("{m}: {} feasible instances", s.feasible),
        );
        out.check(s.marginal <= MARGINAL_TOL, format!("{m}: marginal error {:e}", s.marginal));
        out.check(s.factor <= FACTOR_TOL, format!("{m}: preserved factor error {:e}", s.factor));
        out.check(s.fixpoint <= FIXPOINT_TOL, format!("{m}: fixpoint error {:e}", s.fixpoint));
    }
    let elapsed = start.elapsed();
    out.check(
        elapsed < CONTRACT_BUDGET,
        format!("runtime {elapsed:?} (budget {CONTRACT_BUDGET:?})"),
    );
    out
}

/// Source with integer R and d >= R; target margins with integer R.
fn coincidence_instance(r: &mut ChaCha8Rng) -> (ContingencyTable, Marginals) {
    loop {
        let [a, b, c, d] = [0; 4].map(|_| r.gen_range(1..=40i64));
        if !integer_r_nonnegative(a, b, c, d) {
            continue;
        }
        let [e, f, g, h] = [0; 4].map(|_| r.gen_range(1..=40i64));
        let n = e + f + g + h;
        if ((g + h) * (f + h)) % n != 0 {
            continue;
        }
        let src = table(vec![vec![a as f64, b as f64], vec![c as f64, d as f64]]);
        let tgt = Marginals::new(vec![(e + f) as f64, (g + h) as f64], vec![(e + g) as f64, (f + h) as f64]).unwrap();
        return (src, tgt);
    }
}

/// The v minimizing `|S - ((1-v) R + v P)|` by scan and ternary refinement.
fn brute_force_v(t: &ContingencyTable) -> f64 {
    let s = t.counts();
    let m = t.marginals();
    let (rows, cols) = (m.row_sums(), m.col_sums());
    let n = m.total();
    let p = pam_2x2(rows, cols);
    let dist = |v: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let rnd = rows[i] * cols[j] / n;
                let x = (1.0 - v) * rnd + v * p[2 * i + j];
                acc += (s[[i, j]] - x).powi(2);
            }
        }
        acc
    };
    let mut best = (-5.0, f64::INFINITY);
    let mut v = -5.0;
    while v <= 5.0 {
        let d = dist(v);
        if d < best.1 {
            best = (v, d);
        }
        v += 1e-3;
    }
    let (mut lo, mut hi) = (best.0 - 2e-3, best.0 + 2e-3);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if dist(a) < dist(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// High-high cell at the target margins whose LL equals `ll`, by bisection.
fn brute_force_nm_d(ll: f64, tgt: &Marginals) -> f64 {
    let (rows, cols) = (tgt.row_sums(), tgt.col_sums());
    let n = tgt.total();
    let rho = floor_snap(rows[1] * cols[1] / n);
    let dmax = rows[1].min(cols[1]);
    let f = |d: f64| (d - rho) / (dmax - rho) - ll;
    let (mut lo, mut hi) = (-10.0 * n, 10.0 * n);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn nm_meda_coincidence() -> Outcome {
    let mut out = Outcome::new();
    let mut r = rng(21);
    let (mut v_gap, mut d_gap) = (0.0f64, 0.0f64);
    for _ in 0..BRUTE_FORCE_INSTANCES {
        let (src, tgt) = coincidence_instance(&mut r);
        v_gap = v_gap.max((brute_force_v(&src) - meda_weight(&src).unwrap()).abs());
        let ll = ll_simplified(&src).unwrap().value;
        let d_bf = brute_force_nm_d(ll, &tgt);
        let nm = nm_fit(&src, &tgt, Rounding::Integer);
        let meda = meda_fit(&src, &tgt);
        if let (Ok(nm), Ok(meda)) = (nm, meda) {
            d_gap = d_gap
                .max((nm.table.get(1, 1) - d_bf).abs())
                .max((meda.table.get(1, 1) - d_bf).abs());
        }
    }
    out.check(v_gap <= 1e-7, format!("brute-force MEDA weight gap {v_gap:e} on {BRUTE_FORCE_INSTANCES} instances"));
    out.check(d_gap <= 1e-8, format!("brute-force high-high cell gap {d_gap:e}"));

    let mut r = rng(22);
    let (mut compared, mut worst, mut mismatched, mut draws) = (0, 0.0f64, 0, 0);
    while compared < COINCIDENCE_INSTANCES && draws < 100 * COINCIDENCE_INSTANCES {
        draws += 1;
        let (src, tgt) = coincidence_instance(&mut r);
        match (nm_fit(&src, &tgt, Rounding::Integer), meda_fit(&src, &tgt)) {
            (Ok(a), Ok(b)) => {
                let scale = tgt.total().max(1.0);
                worst = worst.max(max_abs_diff(a.table.counts(), b.table.counts()) / scale);
                compared += 1;
            }
            (Err(_), Err(_)) => {}
            _ => mismatched += 1,
        }
    }
    out.check(compared == COINCIDENCE_INSTANCES, format!("{compared} feasible instances compared"));
    out.check(mismatched == 0, format!("{mismatched} instances feasible under one method only"));
    out.check(worst <= COINCIDENCE_TOL, format!("max table gap {worst:e} (tol {COINCIDENCE_TOL:e})"));
    out
}

fn criteria_matrix() -> Outcome {
    let mut out = Outcome::new();
    let reports: Vec<CriterionReport> = indicator_matrix(DEFAULT_SAMPLES, DEFAULT_SEED)
        .into_iter()
        .chain(method_matrix(DEFAULT_SAMPLES, DEFAULT_SEED))
        .collect();
    let by_key: HashMap<(CriterionId, Subject), &CriterionReport> =
        reports.iter().map(|r| ((r.criterion, r.subject), r)).collect();
    let verdict = |c: CriterionId, s: Subject| by_key[&(c, s)].verdict;
    let ind = |t: IndicatorTag| Subject::Indicator(t);
    let yes = Verdict::SatisfiedOnSample;
    let no = Verdict::CounterexampleFound;
    let describe = |c: CriterionId, s: Subject| {
        let r = by_key[&(c, s)];
        match &r.witness {
            Some(w) => format!("{} (violation {:e})", r.verdict.code(), w.violation),
            None => r.verdict.code().to_string(),
        }
    };

    let regression = ind(IndicatorTag::Regression);
    out.check(
        verdict(CriterionId::Ac3, regression) == no,
        format!("AC3 regression N: got {}", describe(CriterionId::Ac3, regression)),
    );
    let msp = ind(IndicatorTag::AggregateMsp);
    out.check(
        verdict(CriterionId::Ac4, msp) == no,
        format!("AC4 aggregate MSP N: got {}", describe(CriterionId::Ac4, msp)),
    );
    for (c, only) in [
        (CriterionId::Ac5_1, IndicatorTag::OddsRatio),
        (CriterionId::Ac5_2, IndicatorTag::AggregateMsp),
    ] {
        for t in IndicatorTag::ALL {
            let want = if t == only { yes } else { no };
            let got = verdict(c, ind(t));
            if got == Verdict::NotApplicable {
                continue;
            }
            out.check(
                got == want,
                format!("{} {t}: want {} got {}", c.code(), want.code(), describe(c, ind(t))),
            );
        }
    }
    for t in IndicatorTag::ALL {
        let got = verdict(CriterionId::Ac8_1, ind(t));
        if got == Verdict::NotApplicable {
            continue;
        }
        out.check(
            got == yes,
            format!("AC8.1 {t}: want Y got {}", describe(CriterionId::Ac8_1, ind(t))),
        );
    }
    let nm_cont = Subject::Method(Method::Nm(Rounding::Continuous));
    let nm = Subject::Method(Method::Nm(Rounding::Integer));
    let ipf = Subject::Method(Method::Ipf);
    out.check(
        verdict(CriterionId::Ac10, nm_cont) == yes,
        format!("AC10 nm-continuous Y: got {}", describe(CriterionId::Ac10, nm_cont)),
    );
    out.check(
        verdict(CriterionId::Ac10, ipf) == no,
        format!("AC10 ipf counterexample: got {}", describe(CriterionId::Ac10, ipf)),
    );
    out.check(
        verdict(CriterionId::Ac12, nm) == yes,
        format!("AC12 nm signals infeasibility: got {}", describe(CriterionId::Ac12, nm)),
    );
    out.check(
        verdict(CriterionId::Ac12, ipf) == no,
        format!("AC12 ipf does not: got {}", describe(CriterionId::Ac12, ipf)),
    );
    let det = ind(IndicatorTag::Determinant);
    out.check(
        verdict(CriterionId::Ac2, det) == no,
        format!("AC2 determinant counterexample: got {}", describe(CriterionId::Ac2, det)),
    );
    let disagreements = reports.iter().filter(|r| r.agrees_with_published() == Some(false)).count();
    out.note(format!("{disagreements} cells differ from the published tables overall"));
    out
}

fn decomposition_additivity() -> Outcome {
    let mut out = Outcome::new();
    let opts = FitOptions::default();
    let methods = [
        Method::Ipf,
        Method::Mdba,
        Method::Meda,
        Method::Csa,
        Method::Nm(Rounding::Integer),
        Method::Nm(Rounding::Continuous),
    ];
    for (k, m) in methods.iter().enumerate() {
        for scheme in [Scheme::Sequential, Scheme::WithInteraction] {
            let dim = if *m == Method::Mdba { 2 } else { 3 };
            let mut r = rng(300 + k as u64);
            let (mut ok, mut worst) = (0, 0.0f64);
            for _ in 0..ADDITIVITY_INSTANCES {
                let draw = |r: &mut ChaCha8Rng| {
                    let rows = random_rows(r, dim, dim, 1, 50);
                    let sm = (0..dim).map(|_| r.gen_range(1..=50) as f64).collect();
                    let sw = (0..dim).map(|_| r.gen_range(1..=50) as f64).collect();
                    TableWithSingles::new(table(rows), sm, sw).unwrap()
                };
                let (e, l) = (draw(&mut r), draw(&mut r));
                let Ok(d) = decompose_observed(&e, &l, *m, scheme, &opts) else {
                    continue;
                };
                ok += 1;
                let sum = d.nonstructural_effect + d.structural_effect + d.interaction_effect.unwrap_or(0.0);
                worst = worst.max((sum - (d.share_late - d.share_early)).abs());
            }
            out.check(
                ok > 0 && worst <= ADDITIVITY_TOL,
                format!("{m} {scheme}: {ok} instances, max residual {worst:e}"),
            );
        }
    }
    // Divergence fixture: both schemes split IPF and NM.
    let early = TableWithSingles::new(table(vec![vec![40., 10.], vec![20., 30.]]), vec![0.; 2], vec![0.; 2]).unwrap();
    let late = TableWithSingles::new(table(vec![vec![10., 10.], vec![10., 70.]]), vec![0.; 2], vec![0.; 2]).unwrap();
    for scheme in [Scheme::Sequential, Scheme::WithInteraction] {
        let ipf = decompose_observed(&early, &late, Method::Ipf, scheme, &opts).unwrap().nonstructural_effect;
        let nm = decompose_observed(&early, &late, Method::Nm(Rounding::Integer), scheme, &opts)
            .unwrap()
            .nonstructural_effect;
        out.check(
            ipf * nm < 0.0,
            format!("divergence fixture {scheme}: ipf {ipf:+.6}, nm {nm:+.6}"),
        );
    }
    out
}

/// Mixture of random and perfectly assortative matching at fixed marginals
/// (30, 40, 30); the homogamy share rises strictly with `w`, and with fixed
/// marginals every method returns the late table unchanged, so the sign of
/// each non-structural effect is the sign of the change in `w`.
fn mixture(w: u32, scale: f64) -> Vec<Vec<f64>> {
    let rnd = [[9., 12., 9.], [12., 16., 12.], [9., 12., 9.]];
    let pam = [[30., 0., 0.], [0., 40., 0.], [0., 0., 30.]];
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| scale * ((10 - w) as f64 * rnd[i][j] + w as f64 * pam[i][j]))
                .collect()
        })
        .collect()
}

const WAVES: [u32; 6] = [1960, 1970, 1980, 1990, 2000, 2010];

fn synthetic_panel() -> (PanelDataset, IncomePanel) {
    // Mixture weights per wave.
    let weights: [(&str, [u32; 6]); 3] = [
        ("Alabama", [6, 5, 4, 3, 4, 6]),  // - - - + +
        ("Missouri", [6, 7, 4, 3, 2, 6]), // + - - - +
        ("Wyoming", [4, 5, 6, 3, 5, 4]),  // + + - + -
    ];
    // Top-10% shares per wave.
    let income: [(&str, [f64; 6]); 3] = [
        ("Alabama", [0.35, 0.34, 0.33, 0.34, 0.36, 0.40]),  // - - + + +
        ("Missouri", [0.30, 0.31, 0.32, 0.31, 0.30, 0.33]), // + + - - +
        ("Wyoming", [0.30, 0.32, 0.31, 0.30, 0.33, 0.35]),  // + - - + +
    ];
    let categories: Vec<String> = ["no_hs", "hs", "college"].map(String::from).to_vec();
    let mut panel = PanelDataset::new(categories).unwrap();
    for (k, (state, w)) in weights.iter().enumerate() {
        for (y, wi) in WAVES.iter().zip(w) {
            let rows = mixture(*wi, (k + 1) as f64);
            for i in 0..3 {
                for j in 0..3 {
                    panel.add(state, *y, Some(i), Some(j), rows[i][j]).unwrap();
                }
            }
        }
    }
    let mut inc = IncomePanel::new();
    for (state, s) in income {
        for (y, v) in WAVES.iter().zip(s) {
            inc.insert(state, *y, v).unwrap();
        }
    }
    (panel, inc)
}

fn trend_scoring() -> Outcome {
    let mut out = Outcome::new();
    let (panel, income) = synthetic_panel();
    let measure = Measure::Nonstructural {
        method: Method::Nm(Rounding::Integer),
        scheme: Scheme::WithInteraction,
    };
    let opts = FitOptions::default();
    let changes = decade_changes(&panel, measure, &opts);
    let st = score(&changes, &income, ALPHA_BOUNDARY);
    // Hand count from the sign comments in `synthetic_panel`:
    // U-consistent: Alabama 5, Missouri 3 (70s, 80s, 2000s), Wyoming 2 (80s, 90s).
    // Income-consistent: Alabama 4, Missouri 4, Wyoming 3.
    let got = (st.n_u, st.n_s, st.n_alpha, st.n_omega, st.n, st.n_alpha_total, st.n_omega_total);
    out.check(
        got == (10, 11, 4, 7, 15, 5, 10),
        format!("(n_U, n_s, n_a, n_w, N, N_a, N_w) = {got:?}, want (10, 11, 4, 7, 15, 5, 10)"),
    );
    let flags: usize = panel
        .states()
        .iter()
        .map(|s| {
            let per: Vec<(u32, f64)> = changes
                .iter()
                .filter(|c| &c.state == s)
                .filter_map(|c| Some((c.decade, c.delta?)))
                .collect();
            classify_u_shape(&per).iter().filter(|(_, f)| *f).count()
        })
        .sum();
    out.check(flags == st.n_u, format!("n_U recomputed from raw deltas: {flags}"));

    let dropped = panel.without_wave("Alabama", 1970);
    let st2 = score(&decade_changes(&dropped, measure, &opts), &income, ALPHA_BOUNDARY);
    out.check(
        (st2.n, st2.n_u, st2.n_alpha_total, st2.n_alpha) == (13, 8, 3, 2),
        format!(
            "drop Alabama 1970: N {} n_U {} N_a {} n_a {} (want 13, 8, 3, 2)",
            st2.n, st2.n_u, st2.n_alpha_total, st2.n_alpha
        ),
    );
    let dropped = panel.without_wave("Wyoming", 2010);
    let st3 = score(&decade_changes(&dropped, measure, &opts), &income, ALPHA_BOUNDARY);
    out.check(
        (st3.n, st3.n_omega_total) == (14, 9),
        format!("drop Wyoming 2010: N {} N_w {} (want 14, 9)", st3.n, st3.n_omega_total),
    );
    let st4 = score(&decade_changes(&panel.without_state("Missouri"), measure, &opts), &income, ALPHA_BOUNDARY);
    out.check(
        (st4.n, st4.n_u, st4.n_omega) == (10, 7, 3),
        format!("drop Missouri: N {} n_U {} n_w {} (want 10, 7, 3)", st4.n, st4.n_u, st4.n_omega),
    );
    let mut reversed = changes.clone();
    reversed.reverse();
    out.check(score(&reversed, &income, ALPHA_BOUNDARY) == st, "order invariance");
    out
}

fn dataset_conditional() -> Outcome {
    let mut out = Outcome::new();
    let Some(path) = std::env::var_os(DATASET_ENV).map(PathBuf::from) else {
        out.status = Status::Skip;
        out.note(format!("set {DATASET_ENV} to an IPUMS-derived couples CSV to run"));
        return out;
    };
    let panel = match load_couples(&path, &CouplesSpec::default()) {
        Ok(p) => p,
        Err(e) => {
            out.check(false, format!("load {}: {e}", path.display()));
            return out;
        }
    };
    let opts = FitOptions::default();
    let runs = [
        (
            CategoryScheme::Three,
            Measure::Nonstructural {
                method: Method::Nm(Rounding::Integer),
                scheme: Scheme::WithInteraction,
            },
        ),
        (
            CategoryScheme::College,
            Measure::Indicator {
                tag: IndicatorTag::LiuLu,
                rounding: Rounding::Integer,
            },
        ),
        (
            CategoryScheme::Hs,
            Measure::Indicator {
                tag: IndicatorTag::LiuLu,
                rounding: Rounding::Integer,
            },
        ),
    ];
    for ((scheme, measure), (label, ratio, n)) in runs.iter().zip(DATASET_TARGETS) {
        let p = panel.regroup(*scheme).unwrap();
        let st = score(&decade_changes(&p, *measure, &opts), &IncomePanel::new(), ALPHA_BOUNDARY);
        let got = st.u_ratio.unwrap_or(f64::NAN);
        out.check(
            (got - ratio).abs() <= DATASET_RATIO_TOL,
            format!("{label}: n_U/N = {}/{} = {got:.4}, want {ratio} +- {DATASET_RATIO_TOL}", st.n_u, st.n),
        );
        out.check(
            st.n.abs_diff(n) <= DATASET_N_TOL,
            format!("{label}: N = {}, want {n} +- {DATASET_N_TOL}", st.n),
        );
    }
    out
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 7] = [
        ("Liu-Lu and V-value equivalence", ll_v_equivalence),
        ("counterfactual contracts", counterfactual_contracts),
        ("NM-MEDA 2x2 coincidence", nm_meda_coincidence),
        ("criteria matrix", criteria_matrix),
        ("decomposition additivity", decomposition_additivity),
        ("trend scoring on synthetic panels", trend_scoring),
        ("dataset-conditional trend reproduction", dataset_conditional),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIPPED",
        };
        println!("acceptance: {tag} {name} [{:.2?}]", start.elapsed());
        for line in outcome.details {
            println!("    {line}");
        }
    }
    println!("acceptance: {failed} of {} criteria failed", checks.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
