//! Structured experiment output shared by the probes and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported without a verdict; never fails a run.
    Measured,
    /// The computation itself errored.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl CheckRecord {
    /// Passes iff `value ≤ bound`.
    pub fn at_most(name: &str, anchor: &str, value: f64, bound: f64) -> Self {
        let ok = value.is_finite() && bound.is_finite() && value <= bound;
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            value: finite(value),
            bound: finite(bound),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            note: None,
        }
    }

    pub fn at_least(name: &str, anchor: &str, value: f64, bound: f64) -> Self {
        let ok = value.is_finite() && bound.is_finite() && value >= bound;
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            value: finite(value),
            bound: finite(bound),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            note: None,
        }
    }

    pub fn measured(name: &str, anchor: &str, value: f64) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            value: finite(value),
            bound: None,
            status: CheckStatus::Measured,
            note: None,
        }
    }

    pub fn error(name: &str, anchor: &str, msg: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            value: None,
            bound: None,
            status: CheckStatus::Error,
            note: Some(msg.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.status, CheckStatus::Fail | CheckStatus::Error)
    }
}

/// Per-check records plus named per-sample series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub name: String,
    pub records: Vec<CheckRecord>,
    pub series: BTreeMap<String, Vec<f64>>,
}

impl ProbeReport {
    pub fn new(name: &str) -> Self {
        ProbeReport {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn push_series(&mut self, key: &str, values: Vec<f64>) {
        self.series.insert(key.into(), values);
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.is_failure()).count()
    }

    pub fn extend(&mut self, other: ProbeReport) {
        self.records.extend(other.records);
        for (k, v) in other.series {
            self.series.entry(k).or_default().extend(v);
        }
    }
}

/// Largest value, ignoring NaN; `-∞` on empty input.
pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
