//! CSV ingestion, run configuration and deterministic output formatting.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counterfactual::{FitOptions, Method};
use crate::criteria::{CriterionId, CriterionReport, PublishedCell, Subject};
use crate::decomposition::Scheme;
use crate::error::{Error, Result};
use crate::indicators::{IndicatorTag, Rounding};
use crate::panel::{
    default_categories, CategoryScheme, IncomePanel, PanelDataset, DEFAULT_WAVES, SINGLE_LABEL,
};
use crate::trend::ALPHA_BOUNDARY;

pub const COUPLES_HEADER: [&str; 5] = ["year", "state", "husband_edu", "wife_edu", "count"];
pub const INCOME_HEADER: [&str; 3] = ["state", "year", "top10_share"];

/// Format with 12 significant digits, shortest form, no negative zero.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    if rounded == 0.0 {
        return "0".into();
    }
    if rounded.abs() < 1e-5 || rounded.abs() >= 1e15 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    Error::Parse { line, message }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn reader<R: Read>(input: R, expected: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers().map_err(csv_error)?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {}, found {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(rdr)
}

fn parse_field<T: FromStr>(field: &str, what: &str, line: u64) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {field:?}"),
    })
}

fn parse_count(field: &str, line: u64) -> Result<f64> {
    let v: f64 = parse_field(field, "count", line)?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("invalid count {field:?}"),
        });
    }
    if v < 0.0 {
        return Err(Error::Validation {
            line,
            message: format!("negative count {field}"),
        });
    }
    Ok(v)
}

/// Settings the couples loader validates against.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplesSpec {
    pub categories: Vec<String>,
    pub waves: Vec<u32>,
}

impl Default for CouplesSpec {
    fn default() -> Self {
        Self {
            categories: default_categories(),
            waves: DEFAULT_WAVES.to_vec(),
        }
    }
}

/// Parse `year,state,husband_edu,wife_edu,count` records. Duplicate keys are
/// summed. An education label of `single` marks a single person of the
/// other sex.
pub fn read_couples<R: Read>(input: R, spec: &CouplesSpec) -> Result<PanelDataset> {
    let mut panel = PanelDataset::new(spec.categories.clone())?;
    let mut rdr = reader(input, &COUPLES_HEADER)?;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let year: u32 = parse_field(&record[0], "year", line)?;
        if !spec.waves.contains(&year) {
            return Err(Error::Parse {
                line,
                message: format!("year {year} is not a configured wave"),
            });
        }
        let state = &record[1];
        if state.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty state".into(),
            });
        }
        let category = |label: &str| -> Result<Option<usize>> {
            if label == SINGLE_LABEL {
                return Ok(None);
            }
            panel
                .category_index(label)
                .map(Some)
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unknown category {label:?}"),
                })
        };
        let husband = category(&record[2])?;
        let wife = category(&record[3])?;
        if husband.is_none() && wife.is_none() {
            return Err(Error::Parse {
                line,
                message: "both partners marked single".into(),
            });
        }
        let count = parse_count(&record[4], line)?;
        panel
            .add(state, year, husband, wife, count)
            .map_err(|e| Error::Validation {
                line,
                message: e.to_string(),
            })?;
    }
    Ok(panel)
}

pub fn load_couples(path: &Path, spec: &CouplesSpec) -> Result<PanelDataset> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_couples(file, spec).map_err(|e| e.with_context(path.display().to_string()))
}

/// Every couple cell of every (state, year), then nonzero singles.
pub fn write_couples<W: Write>(panel: &PanelDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Config(format!("write failed: {e}"));
    w.write_record(COUPLES_HEADER).map_err(err)?;
    let cats = panel.categories();
    for ((state, year), cell) in panel.cells() {
        let year = year.to_string();
        let mut row = |h: &str, wf: &str, v: f64| {
            w.write_record([year.as_str(), state, h, wf, &format!("{v}")])
        };
        for (i, h) in cats.iter().enumerate() {
            for (j, wf) in cats.iter().enumerate() {
                row(h, wf, cell.couples[[i, j]]).map_err(err)?;
            }
        }
        for (i, h) in cats.iter().enumerate() {
            if cell.single_men[i] > 0.0 {
                row(h, SINGLE_LABEL, cell.single_men[i]).map_err(err)?;
            }
        }
        for (j, wf) in cats.iter().enumerate() {
            if cell.single_women[j] > 0.0 {
                row(SINGLE_LABEL, wf, cell.single_women[j]).map_err(err)?;
            }
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("write failed: {e}")))
}

/// Parse `state,year,top10_share` records.
pub fn read_income<R: Read>(input: R) -> Result<IncomePanel> {
    let mut panel = IncomePanel::new();
    let mut seen = BTreeSet::new();
    let mut rdr = reader(input, &INCOME_HEADER)?;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let state = record[0].to_string();
        if state.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty state".into(),
            });
        }
        let year: u32 = parse_field(&record[1], "year", line)?;
        let share: f64 = parse_field(&record[2], "top10_share", line)?;
        if !seen.insert((state.clone(), year)) {
            return Err(Error::Validation {
                line,
                message: format!("duplicate income record for {state} {year}"),
            });
        }
        panel
            .insert(&state, year, share)
            .map_err(|e| Error::Validation {
                line,
                message: e.to_string(),
            })?;
    }
    Ok(panel)
}

pub fn load_income(path: &Path) -> Result<IncomePanel> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_income(file).map_err(|e| e.with_context(path.display().to_string()))
}

mod as_str {
    use serde::{de, Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

mod as_opt_str {
    use serde::{de, Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(de::Error::custom))
            .transpose()
    }
}

/// Settings for one CLI run. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub waves: Vec<u32>,
    /// Ordered education categories, lowest first.
    pub categories: Vec<String>,
    pub category_scheme: CategoryScheme,
    #[serde(with = "as_str")]
    pub method: Method,
    /// Decomposition scheme; the method's default when absent.
    pub scheme: Option<Scheme>,
    pub rounding: Rounding,
    /// Track this indicator in `trend` instead of the method's effect.
    #[serde(with = "as_opt_str")]
    pub indicator: Option<IndicatorTag>,
    pub fit: FitOptions,
    pub seed: u64,
    pub samples: usize,
    pub include_unknown: bool,
    pub alpha_boundary: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            waves: DEFAULT_WAVES.to_vec(),
            categories: default_categories(),
            category_scheme: CategoryScheme::Three,
            method: Method::Nm(Rounding::Integer),
            scheme: None,
            rounding: Rounding::Integer,
            indicator: None,
            fit: FitOptions::default(),
            seed: crate::criteria::DEFAULT_SEED,
            samples: crate::criteria::DEFAULT_SAMPLES,
            include_unknown: false,
            alpha_boundary: ALPHA_BOUNDARY.into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.waves.len() < 2 || self.waves.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "waves must hold at least 2 strictly increasing years".into(),
            ));
        }
        PanelDataset::new(self.categories.clone())?;
        self.category_scheme.partition(self.categories.len())?;
        if !(self.fit.tol > 0.0 && self.fit.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.fit.tol)));
        }
        if self.fit.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.fit.damping > 0.0 && self.fit.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.fit.damping
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    /// The configured method with the configured NM rounding applied.
    pub fn effective_method(&self) -> Method {
        match self.method {
            Method::Nm(Rounding::Integer) => Method::Nm(self.rounding),
            m => m,
        }
    }

    pub fn effective_scheme(&self) -> Scheme {
        self.scheme
            .unwrap_or_else(|| Scheme::default_for(self.effective_method()))
    }

    pub fn couples_spec(&self) -> CouplesSpec {
        CouplesSpec {
            categories: self.categories.clone(),
            waves: self.waves.clone(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_config(&text).map_err(|e| e.with_context(path.display().to_string()))
}

fn write_rows<W: Write, I, R>(out: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let err = |e: csv::Error| Error::Config(format!("write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("write failed: {e}")))
}

/// Generic CSV table writer for CLI artifacts.
pub fn write_csv<W: Write, S: AsRef<str>>(out: W, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    write_rows(
        out,
        header,
        rows.iter().map(|r| r.iter().map(|s| s.as_ref().as_bytes())),
    )
}

/// One line per criterion and subject.
pub fn write_criteria_long<W: Write>(reports: &[CriterionReport], out: W) -> Result<()> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.criterion.code().to_string(),
                r.subject.to_string(),
                r.verdict.code().to_string(),
                r.published().code().to_string(),
                match r.agrees_with_published() {
                    Some(true) => "yes".into(),
                    Some(false) => "no".into(),
                    None => String::new(),
                },
                r.sample_size.to_string(),
                r.witness.as_ref().map(|w| fmt_num(w.violation)).unwrap_or_default(),
                r.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        out,
        &["criterion", "subject", "verdict", "published", "agrees", "sample_size", "violation", "note"],
        &rows,
    )
}

/// Criteria as rows, subjects as columns, verdict codes in the cells.
pub fn write_criteria_matrix<W: Write>(
    reports: &[CriterionReport],
    rows: &[CriterionId],
    subjects: &[Subject],
    out: W,
) -> Result<()> {
    let names: Vec<String> = subjects.iter().map(|s| s.to_string()).collect();
    let mut header = vec!["criterion"];
    header.extend(names.iter().map(String::as_str));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|c| {
            let mut row = vec![c.code().to_string()];
            for s in subjects {
                let cell = reports
                    .iter()
                    .find(|r| r.criterion == *c && r.subject == *s)
                    .map(|r| r.verdict.code())
                    .unwrap_or(PublishedCell::Blank.code());
                row.push(cell.to_string());
            }
            row
        })
        .collect();
    write_csv(out, &header, &body)
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))
}

pub fn display_list<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
