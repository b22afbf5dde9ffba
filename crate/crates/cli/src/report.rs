//! Experiment results and their three renderings.
//!
//! JSON is the source of truth:
//!
//! ```text
//! {
//!   "schema": "nccz-report/1",
//!   "version": "<crate version>",
//!   "experiment": "<catalog name>",
//!   "config": { "<key>": "<canonical value>", ... },
//!   "counts": { "pass": n, "fail": n, "measured": n, "error": n },
//!   "records": [ { "name", "anchor", "value", "bound", "status", "note"? }, ... ],
//!   "series": { "<name>": [number | null, ...], ... }
//! }
//! ```
//!
//! `value` and `bound` are `null` when absent or non-finite; `status` is one
//! of `pass`, `fail`, `measured`, `error`. Wall time is not part of the
//! document, so a fixed seed reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nccz::report::{CheckRecord, CheckStatus, ProbeReport};
use serde::{Deserialize, Serialize};

use crate::config::{Config, Format};
use crate::error::CliError;

pub const SCHEMA: &str = "nccz-report/1";

/// Keys left out of the config echo: they change where and how fast a run
/// goes, not what it computes.
const NOT_ECHOED: [&str; 3] = ["jobs", "output.path", "output.format"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub measured: usize,
    pub error: usize,
}

impl Counts {
    pub fn of(records: &[CheckRecord]) -> Self {
        let mut c = Counts::default();
        for r in records {
            match r.status {
                CheckStatus::Pass => c.pass += 1,
                CheckStatus::Fail => c.fail += 1,
                CheckStatus::Measured => c.measured += 1,
                CheckStatus::Error => c.error += 1,
            }
        }
        c
    }

    pub fn failures(&self) -> usize {
        self.fail + self.error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: String,
    pub version: String,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub counts: Counts,
    pub records: Vec<CheckRecord>,
    pub series: BTreeMap<String, Vec<Option<f64>>>,
}

impl ExperimentResult {
    pub fn new(cfg: &Config, report: ProbeReport) -> Self {
        let config = cfg
            .entries()
            .into_iter()
            .filter(|(k, _)| !NOT_ECHOED.contains(k))
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let series = report
            .series
            .into_iter()
            .map(|(k, v)| {
                (
                    k,
                    v.into_iter().map(|x| x.is_finite().then_some(x)).collect(),
                )
            })
            .collect();
        ExperimentResult {
            schema: SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: cfg.experiment.to_string(),
            config,
            counts: Counts::of(&report.records),
            records: report.records,
            series,
        }
    }

    pub fn failures(&self) -> usize {
        self.counts.failures()
    }
}

pub fn to_json(r: &ExperimentResult) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentResult, CliError> {
    Ok(serde_json::from_str(text)?)
}

pub const CSV_HEADER: [&str; 7] = [
    "experiment",
    "name",
    "anchor",
    "status",
    "value",
    "bound",
    "note",
];

fn num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn status_name(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Measured => "measured",
        CheckStatus::Error => "error",
    }
}

/// One row per record; series are left to the JSON.
pub fn to_csv(r: &ExperimentResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for rec in &r.records {
        w.write_record([
            r.experiment.as_str(),
            &rec.name,
            &rec.anchor,
            status_name(rec.status),
            &num(rec.value),
            &num(rec.bound),
            rec.note.as_deref().unwrap_or(""),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

fn cell(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6e}"))
}

/// Fixed-width table followed by the counts line.
pub fn to_summary(r: &ExperimentResult) -> String {
    let w = r
        .records
        .iter()
        .map(|x| x.name.len())
        .max()
        .unwrap_or(4)
        .clamp(4, 60);
    let mut s = String::new();
    let _ = writeln!(s, "{} ({} {})", r.experiment, r.schema, r.version);
    let _ = writeln!(
        s,
        "{:<w$}  {:>13}  {:>13}  {:<8}  anchor",
        "check", "value", "bound", "status"
    );
    for rec in &r.records {
        let _ = writeln!(
            s,
            "{:<w$}  {:>13}  {:>13}  {:<8}  {}",
            rec.name,
            cell(rec.value),
            cell(rec.bound),
            status_name(rec.status),
            rec.anchor
        );
        if let (CheckStatus::Error | CheckStatus::Fail, Some(n)) = (rec.status, &rec.note) {
            let _ = writeln!(s, "{:<w$}    note: {n}", "");
        }
    }
    let c = r.counts;
    let _ = writeln!(
        s,
        "pass {}  fail {}  measured {}  error {}",
        c.pass, c.fail, c.measured, c.error
    );
    s
}

pub fn render(r: &ExperimentResult, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => to_json(r),
        Format::Csv => to_csv(r),
        Format::Summary => Ok(to_summary(r)),
    }
}

/// Writes the rendering to `path`, or to stdout when `path` is `None`.
pub fn emit_report(
    r: &ExperimentResult,
    format: Format,
    path: Option<&Path>,
) -> Result<(), CliError> {
    let text = render(r, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
