use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use homlab::counterfactual::{fit_observed, CounterfactualResult, Method};
use homlab::criteria::{indicator_matrix, method_matrix, CriterionId, Subject, METHOD_SUBJECTS};
use homlab::decomposition::{cumulative_series, decompose_observed, DecompositionResult};
use homlab::indicators::{gll_with, ll_cells, IndicatorTag, Rounding};
use homlab::io::{
    fmt_num, fmt_opt, load_config, load_couples, load_income, write_criteria_long,
    write_criteria_matrix, write_csv, RunConfig,
};
use homlab::panel::{IncomePanel, PanelDataset};
use homlab::tables::TableWithSingles;
use homlab::trend::{classify_pairs, decade_changes, decade_label, score_pairs, Measure};

use crate::Common;

pub const NATIONAL: &str = "national";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] homlab::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

fn config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &c.method {
        cfg.method = m.parse()?;
    }
    if let Some(s) = &c.categories {
        cfg.category_scheme = s.parse()?;
    }
    if let Some(r) = &c.rounding {
        cfg.rounding = r.parse()?;
    }
    if let Some(s) = &c.scheme {
        cfg.scheme = Some(s.parse()?);
    }
    if let Some(i) = &c.indicator {
        cfg.indicator = Some(i.parse()?);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn panel(c: &Common, cfg: &RunConfig) -> Result<PanelDataset> {
    let path = c
        .couples
        .as_ref()
        .ok_or_else(|| CliError::Usage("--couples is required".into()))?;
    Ok(load_couples(path, &cfg.couples_spec())?.regroup(cfg.category_scheme)?)
}

fn income(c: &Common) -> Result<IncomePanel> {
    match &c.income {
        Some(p) => Ok(load_income(p)?),
        None => Ok(IncomePanel::new()),
    }
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((BufWriter::new(file), path))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let text = serde_json::to_string_pretty(v).expect("json value") + "\n";
    fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Round to 12 significant digits for stable JSON output.
fn r12(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_num(x).parse::<f64>().expect("formatted float"))
    } else {
        Value::Null
    }
}

fn r12_opt(x: Option<f64>) -> Value {
    x.map(r12).unwrap_or(Value::Null)
}

/// Tables of every (state, year) followed by the national table per year.
fn all_tables(
    panel: &PanelDataset,
    cfg: &RunConfig,
) -> Vec<(String, u32, homlab::Result<TableWithSingles>)> {
    let mut out = Vec::new();
    for ((state, year), _) in panel.cells() {
        if state == homlab::panel::UNKNOWN_STATE {
            continue;
        }
        out.push((state.clone(), *year, panel.table(state, *year).expect("present")));
    }
    for year in panel.years() {
        if let Some(t) = panel.national(year, cfg.include_unknown) {
            out.push((NATIONAL.to_string(), year, t));
        }
    }
    out
}

fn indicator_entries(
    tag: IndicatorTag,
    t: &TableWithSingles,
    rounding: Rounding,
) -> Vec<(usize, usize, homlab::Result<f64>)> {
    let one = |v: homlab::Result<f64>| vec![(1, 1, v)];
    match tag {
        IndicatorTag::LiuLu => one(
            t.couples()
                .cells_2x2()
                .and_then(|c| ll_cells(c, rounding))
                .map(|d| d.value),
        ),
        IndicatorTag::GeneralizedLiuLu => {
            let g = gll_with(t.couples(), rounding);
            let (n, m) = g.dim();
            let mut v = Vec::new();
            for j in 1..=n {
                for k in 1..=m {
                    v.push((j, k, g.entry(j, k).clone().map(|d| d.value)));
                }
            }
            v
        }
        IndicatorTag::SurplusMatrix if !t_has_singles(t) => one(Err(homlab::Error::UndefinedIndicator(
            "surplus_matrix needs singles counts".into(),
        ))),
        _ => match tag.evaluate_with_singles(t) {
            Ok(a) => a
                .indexed_iter()
                .map(|((i, j), v)| (i + 1, j + 1, Ok(*v)))
                .collect(),
            Err(e) => one(Err(e)),
        },
    }
}

fn t_has_singles(t: &TableWithSingles) -> bool {
    t.single_men().iter().chain(t.single_women()).any(|v| *v > 0.0)
}

pub fn indicators(c: &Common) -> Result<Vec<PathBuf>> {
    let cfg = config(c)?;
    let panel = panel(c, &cfg)?;
    let mut rows = Vec::new();
    for (state, year, table) in all_tables(&panel, &cfg) {
        for tag in IndicatorTag::ALL {
            let entries = match &table {
                Ok(t) => indicator_entries(tag, t, cfg.rounding),
                Err(e) => vec![(1, 1, Err(e.clone()))],
            };
            for (i, j, v) in entries {
                let (value, note) = match v {
                    Ok(v) => (fmt_num(v), String::new()),
                    Err(e) => (String::new(), e.to_string()),
                };
                rows.push(vec![
                    state.clone(),
                    year.to_string(),
                    tag.name().to_string(),
                    i.to_string(),
                    j.to_string(),
                    value,
                    note,
                ]);
            }
        }
    }
    let (w, path) = create(&c.out, "indicators.csv")?;
    write_csv(w, &["state", "year", "indicator", "row", "col", "value", "note"], &rows)?;
    Ok(vec![path])
}

fn result_json(r: &CounterfactualResult) -> Value {
    let table: Vec<Vec<Value>> = r
        .table
        .to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(r12).collect())
        .collect();
    let diagnostics: serde_json::Map<String, Value> = r
        .diagnostics
        .iter()
        .map(|(k, v)| {
            let v = match v.as_f64() {
                Some(x) if v.is_f64() => r12(x),
                _ => v.clone(),
            };
            (k.clone(), v)
        })
        .collect();
    json!({
        "row_labels": r.table.row_labels(),
        "col_labels": r.table.col_labels(),
        "table": table,
        "iterations": r.iterations,
        "max_marginal_error": r12(r.max_marginal_error),
        "feasible": r.feasible,
        "diagnostics": diagnostics,
        "singles": r.singles.as_ref().map(|s| json!({
            "men": s.men.iter().map(|v| r12(*v)).collect::<Vec<_>>(),
            "women": s.women.iter().map(|v| r12(*v)).collect::<Vec<_>>(),
        })),
    })
}

fn lookup(
    panel: &PanelDataset,
    cfg: &RunConfig,
    state: &str,
    year: u32,
) -> Result<TableWithSingles> {
    let t = if state == NATIONAL {
        panel.national(year, cfg.include_unknown)
    } else {
        panel.table(state, year)
    };
    t.ok_or_else(|| CliError::Usage(format!("no table for {state} {year}")))?
        .map_err(CliError::from)
}

pub fn counterfactual(
    c: &Common,
    state: Option<&str>,
    target_state: Option<&str>,
    source_year: Option<u32>,
    target_year: Option<u32>,
) -> Result<Vec<PathBuf>> {
    let cfg = config(c)?;
    let panel = panel(c, &cfg)?;
    let state = state.unwrap_or(NATIONAL);
    let target_state = target_state.unwrap_or(state);
    let source_year = source_year.unwrap_or(*cfg.waves.last().expect("validated"));
    let target_year = target_year.unwrap_or(cfg.waves[0]);
    let source = lookup(&panel, &cfg, state, source_year)?;
    let target = lookup(&panel, &cfg, target_state, target_year)?;
    let method = cfg.effective_method();
    let (result, error) = match fit_observed(method, &source, &target, &cfg.fit) {
        Ok(r) => (result_json(&r), Value::Null),
        Err(e) => (Value::Null, json!(e.to_string())),
    };
    let doc = json!({
        "method": method.name(),
        "category_scheme": cfg.category_scheme.name(),
        "source": {"state": state, "year": source_year},
        "target": {"state": target_state, "year": target_year},
        "result": result,
        "error": error,
    });
    Ok(vec![write_json(&c.out, "counterfactual.json", &doc)?])
}

fn decomposition_row(
    state: &str,
    early_year: u32,
    late_year: u32,
    method: Method,
    cfg: &RunConfig,
    d: homlab::Result<DecompositionResult>,
) -> Vec<String> {
    let mut row = vec![
        state.to_string(),
        decade_label(early_year),
        early_year.to_string(),
        late_year.to_string(),
        method.name().to_string(),
        cfg.effective_scheme().name().to_string(),
    ];
    match d {
        Ok(d) => {
            row.extend([
                fmt_num(d.share_early),
                fmt_num(d.share_late),
                fmt_num(d.share_counterfactual),
                fmt_num(d.nonstructural_effect),
                fmt_num(d.structural_effect),
                fmt_opt(d.interaction_effect),
                "ok".to_string(),
            ]);
        }
        Err(e) => {
            row.extend(std::iter::repeat(String::new()).take(6));
            row.push(e.to_string());
        }
    }
    row
}

pub fn decompose(c: &Common) -> Result<Vec<PathBuf>> {
    let cfg = config(c)?;
    let panel = panel(c, &cfg)?;
    let method = cfg.effective_method();
    let scheme = cfg.effective_scheme();
    let mut states = panel.states();
    states.push(NATIONAL.to_string());
    let mut rows = Vec::new();
    for state in &states {
        for w in cfg.waves.windows(2) {
            let (e, l) = (w[0], w[1]);
            let get = |y| {
                if state == NATIONAL {
                    panel.national(y, cfg.include_unknown)
                } else {
                    panel.table(state, y)
                }
            };
            let d = match (get(e), get(l)) {
                (Some(early), Some(late)) => early.and_then(|early| {
                    decompose_observed(&early, &late?, method, scheme, &cfg.fit)
                }),
                (None, _) => Err(homlab::Error::InsufficientData(format!("missing {e} wave"))),
                (_, None) => Err(homlab::Error::InsufficientData(format!("missing {l} wave"))),
            }
            .map_err(|err| err.with_context(format!("{state} {}", decade_label(e))));
            rows.push(decomposition_row(state, e, l, method, &cfg, d));
        }
    }
    let (w, path) = create(&c.out, "decomposition.csv")?;
    write_csv(
        w,
        &[
            "state",
            "decade",
            "early_year",
            "late_year",
            "method",
            "scheme",
            "share_early",
            "share_late",
            "share_counterfactual",
            "nonstructural_effect",
            "structural_effect",
            "interaction_effect",
            "status",
        ],
        &rows,
    )?;
    Ok(vec![path])
}

pub fn trend(c: &Common) -> Result<Vec<PathBuf>> {
    let cfg = config(c)?;
    let panel = panel(c, &cfg)?;
    let income = income(c)?;
    if income.is_empty() {
        eprintln!("note: no income data, n_s counts will be zero");
    }
    let method = cfg.effective_method();
    let scheme = cfg.effective_scheme();
    let measure = match cfg.indicator {
        Some(tag) => Measure::Indicator {
            tag,
            rounding: cfg.rounding,
        },
        None => Measure::Nonstructural { method, scheme },
    };
    let changes = decade_changes(&panel, measure, &cfg.fit);
    let pairs = classify_pairs(&changes, &income, &cfg.alpha_boundary);
    let stats = score_pairs(&pairs);
    let mut written = Vec::new();

    let doc = json!({
        "measure": measure.name(),
        "category_scheme": cfg.category_scheme.name(),
        "alpha_boundary": cfg.alpha_boundary,
        "n_U": stats.n_u,
        "n_s": stats.n_s,
        "n_alpha": stats.n_alpha,
        "n_omega": stats.n_omega,
        "N": stats.n,
        "N_alpha": stats.n_alpha_total,
        "N_omega": stats.n_omega_total,
        "n_alpha/N_alpha": r12_opt(stats.alpha_ratio),
        "n_omega/N_omega": r12_opt(stats.omega_ratio),
        "n_s/N": r12_opt(stats.s_ratio),
        "n_U/N": r12_opt(stats.u_ratio),
        "excluded_pairs": pairs.iter().filter(|p| p.delta.is_none()).count(),
    });
    written.push(write_json(&c.out, "trend_stats.json", &doc)?);

    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|p| {
            let reason = match &p.income {
                homlab::trend::IncomeFlag::Excluded(r) if p.delta.is_some() => r.clone(),
                _ => String::new(),
            };
            vec![
                p.state.clone(),
                decade_label(p.decade),
                fmt_opt(p.delta),
                if p.first_half { "alpha" } else { "omega" }.to_string(),
                p.u_consistent.map(|b| b.to_string()).unwrap_or_default(),
                p.income.name().to_string(),
                p.exclusion.clone().unwrap_or(reason),
            ]
        })
        .collect();
    let (w, path) = create(&c.out, "trend_pairs.csv")?;
    write_csv(
        w,
        &["state", "decade", "delta", "half", "u_consistent", "income", "note"],
        &rows,
    )?;
    written.push(path);

    let mut series_rows = Vec::new();
    let mut units = vec![NATIONAL.to_string()];
    units.extend(panel.states());
    for unit in &units {
        let waves: Vec<(u32, Option<TableWithSingles>)> = cfg
            .waves
            .iter()
            .map(|&y| {
                let t = if unit == NATIONAL {
                    panel.national(y, cfg.include_unknown)
                } else {
                    panel.table(unit, y)
                };
                (y, t.and_then(|r| r.ok()))
            })
            .collect();
        match cumulative_series(&waves, method, scheme, &cfg.fit) {
            Ok(s) => {
                for p in s.points {
                    series_rows.push(vec![
                        unit.clone(),
                        p.year.to_string(),
                        fmt_opt(p.observed),
                        fmt_opt(p.nonstructural_effect),
                        fmt_opt(p.cumulative),
                        p.gap.unwrap_or_default(),
                    ]);
                }
            }
            Err(e) => series_rows.push(vec![
                unit.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ]),
        }
    }
    let (w, path) = create(&c.out, "trend_series.csv")?;
    write_csv(
        w,
        &["series", "year", "observed", "nonstructural_effect", "cumulative", "gap"],
        &series_rows,
    )?;
    written.push(path);
    Ok(written)
}

pub fn criteria(c: &Common, samples: Option<usize>) -> Result<Vec<PathBuf>> {
    let cfg = config(c)?;
    let samples = samples.unwrap_or(cfg.samples);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let ind = indicator_matrix(samples, cfg.seed);
    let met = method_matrix(samples, cfg.seed);
    let ind_subjects: Vec<Subject> = IndicatorTag::ALL.iter().map(|t| Subject::Indicator(*t)).collect();
    let met_subjects: Vec<Subject> = METHOD_SUBJECTS.iter().map(|m| Subject::Method(*m)).collect();
    let mut written = Vec::new();
    let (w, path) = create(&c.out, "criteria_indicators.csv")?;
    write_criteria_matrix(&ind, &CriterionId::INDICATOR_ROWS, &ind_subjects, w)?;
    written.push(path);
    let (w, path) = create(&c.out, "criteria_methods.csv")?;
    write_criteria_matrix(&met, &CriterionId::METHOD_ROWS, &met_subjects, w)?;
    written.push(path);
    let all: Vec<_> = ind.into_iter().chain(met).collect();
    let (w, path) = create(&c.out, "criteria_details.csv")?;
    write_criteria_long(&all, w)?;
    written.push(path);
    Ok(written)
}
