//! `key = value` configuration with dotted section keys.
//!
//! Blank lines and `#` comments are ignored. Every key is optional except
//! `experiment`; [`Config::to_text`] writes the canonical form, which parses
//! back to an equal value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nccz::cuculescu::TriPart;
use nccz::dyadic::{Grid, MAX_LOG_LEAVES};
use nccz::hardy::AtomKind;

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }

            pub fn names() -> String {
                Self::ALL.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ")
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!("`{s}` is not one of: {}", Self::names()))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_enum!(Experiment {
    CuculescuBounds => "cuculescu_bounds",
    CzIdentities => "cz_identities",
    LacunaryIdentities => "lacunary_identities",
    PerfectDyadicAnnihilation => "perfect_dyadic_annihilation",
    HaarShiftAnnihilation => "haar_shift_annihilation",
    ShiftL2 => "shift_l2",
    DilationLemma => "dilation_lemma",
    AtomBounds => "atom_bounds",
    TransformParaproduct => "transform_paraproduct",
    BmoEstimates => "bmo_estimates",
    Gundy => "gundy",
    LeftrightCz => "leftright_cz",
    TruncationProbe => "truncation_probe",
    WeakTypeScan => "weak_type_scan",
});

named_enum!(
    /// Operator family; `auto` lets each experiment pick its own set.
    OperatorKind {
        Auto => "auto",
        IdentityShift => "identity_shift",
        Hilbert => "hilbert",
        HilbertTranspose => "hilbert_transpose",
        RandomShift => "random_shift",
        PerfectMultiplier => "perfect_multiplier",
        PerfectParaproduct => "perfect_paraproduct",
        PerfectParaproductAdjoint => "perfect_paraproduct_adjoint",
        Transform => "transform",
        Paraproduct => "paraproduct",
        ParaproductAdjoint => "paraproduct_adjoint",
        Riesz => "riesz",
        Sign => "sign",
        File => "file",
    }
);

named_enum!(SideSel {
    Column => "column",
    Row => "row",
    Both => "both",
});

named_enum!(Format {
    Json => "json",
    Csv => "csv",
    Summary => "summary",
});

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub experiment: Experiment,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub n: u32,
    pub depth: u32,
    pub d: usize,
    pub pad: u32,
    pub samples: usize,
    pub spikes: usize,
    pub spike_scale: f64,
    pub s_min: i32,
    /// `None` picks the smallest admissible value per sample.
    pub s_max: Option<i32>,
    pub ell_min: i32,
    pub ell_max: i32,
    pub op_kind: OperatorKind,
    pub op_side: SideSel,
    pub op_r: u32,
    pub op_s: u32,
    pub op_scale: f64,
    pub op_file: Option<PathBuf>,
    pub dilation_s: u32,
    /// `None` runs every atom kind.
    pub atom_kind: Option<AtomKind>,
    pub part: TriPart,
    pub alpha_bound: f64,
    pub upper_rich: bool,
    pub ceiling: f64,
    pub ledger: Option<PathBuf>,
    pub tol_identity: f64,
    pub tol_shift_c: f64,
    pub tol_oracle: f64,
    /// Relative slack on inequality checks.
    pub tol_inequality: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Config {
    pub fn new(experiment: Experiment) -> Self {
        Config {
            experiment,
            seed: 0,
            jobs: 0,
            n: 1,
            depth: 4,
            d: 2,
            pad: 0,
            samples: 50,
            spikes: 2,
            spike_scale: 16.0,
            s_min: -4,
            s_max: None,
            ell_min: -1,
            ell_max: 3,
            op_kind: OperatorKind::Auto,
            op_side: SideSel::Both,
            op_r: 0,
            op_s: 1,
            op_scale: 1.0,
            op_file: None,
            dilation_s: 1,
            atom_kind: None,
            part: TriPart::Upper,
            alpha_bound: 1.0,
            upper_rich: true,
            ceiling: 100.0,
            ledger: None,
            tol_identity: 1e-8,
            tol_shift_c: 1e-10,
            tol_oracle: 1e-10,
            tol_inequality: 1e-12,
            out: None,
            format: Format::Json,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.depth, self.pad).expect("validated")
    }

    pub fn ells(&self) -> Vec<i32> {
        (self.ell_min..=self.ell_max).collect()
    }

    /// Canonical `key = value` lines, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: &Option<PathBuf>| {
            v.as_ref()
                .map_or("none".into(), |p| p.display().to_string())
        };
        vec![
            ("version", CONFIG_VERSION.to_string()),
            ("experiment", self.experiment.to_string()),
            ("seed", self.seed.to_string()),
            ("jobs", self.jobs.to_string()),
            ("grid.n", self.n.to_string()),
            ("grid.K", self.depth.to_string()),
            ("grid.d", self.d.to_string()),
            ("grid.pad", self.pad.to_string()),
            ("ensemble.samples", self.samples.to_string()),
            ("ensemble.spikes", self.spikes.to_string()),
            ("ensemble.spike_scale", self.spike_scale.to_string()),
            ("lacunary.s_min", self.s_min.to_string()),
            (
                "lacunary.s_max",
                self.s_max.map_or("auto".into(), |s| s.to_string()),
            ),
            ("lambda.ell_min", self.ell_min.to_string()),
            ("lambda.ell_max", self.ell_max.to_string()),
            ("operator.kind", self.op_kind.to_string()),
            ("operator.side", self.op_side.to_string()),
            ("operator.r", self.op_r.to_string()),
            ("operator.s", self.op_s.to_string()),
            ("operator.scale", self.op_scale.to_string()),
            ("operator.file", opt(&self.op_file)),
            ("dilation.s", self.dilation_s.to_string()),
            (
                "atoms.kind",
                self.atom_kind.map_or("all".into(), |k| k.name().into()),
            ),
            ("probe.part", part_name(self.part).into()),
            ("probe.alpha_bound", self.alpha_bound.to_string()),
            ("probe.upper_rich", self.upper_rich.to_string()),
            ("probe.ceiling", self.ceiling.to_string()),
            ("probe.ledger", opt(&self.ledger)),
            ("tol.identity", self.tol_identity.to_string()),
            ("tol.shift_c", self.tol_shift_c.to_string()),
            ("tol.oracle", self.tol_oracle.to_string()),
            ("tol.inequality", self.tol_inequality.to_string()),
            ("output.path", opt(&self.out)),
            ("output.format", self.format.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "version" => {
                let ver: u32 = parse(v)?;
                if ver != CONFIG_VERSION {
                    return Err(format!("unsupported config version {ver}"));
                }
            }
            "experiment" => self.experiment = v.parse()?,
            "seed" => self.seed = parse(v)?,
            "jobs" => self.jobs = parse(v)?,
            "grid.n" => self.n = parse(v)?,
            "grid.K" => self.depth = parse(v)?,
            "grid.d" => self.d = parse(v)?,
            "grid.pad" => self.pad = parse(v)?,
            "ensemble.samples" => self.samples = parse(v)?,
            "ensemble.spikes" => self.spikes = parse(v)?,
            "ensemble.spike_scale" => self.spike_scale = parse(v)?,
            "lacunary.s_min" => self.s_min = parse(v)?,
            "lacunary.s_max" => self.s_max = if v == "auto" { None } else { Some(parse(v)?) },
            "lambda.ell_min" => self.ell_min = parse(v)?,
            "lambda.ell_max" => self.ell_max = parse(v)?,
            "operator.kind" => self.op_kind = v.parse()?,
            "operator.side" => self.op_side = v.parse()?,
            "operator.r" => self.op_r = parse(v)?,
            "operator.s" => self.op_s = parse(v)?,
            "operator.scale" => self.op_scale = parse(v)?,
            "operator.file" => self.op_file = path(v),
            "dilation.s" => self.dilation_s = parse(v)?,
            "atoms.kind" => {
                self.atom_kind = if v == "all" {
                    None
                } else {
                    Some(AtomKind::parse(v).ok_or_else(|| {
                        let names: Vec<&str> = AtomKind::ALL.iter().map(|k| k.name()).collect();
                        format!("`{v}` is not one of: all, {}", names.join(", "))
                    })?)
                }
            }
            "probe.part" => {
                self.part = match v {
                    "upper" => TriPart::Upper,
                    "lower" => TriPart::Lower,
                    _ => return Err(format!("`{v}` is not one of: upper, lower")),
                }
            }
            "probe.alpha_bound" => self.alpha_bound = parse(v)?,
            "probe.upper_rich" => self.upper_rich = parse(v)?,
            "probe.ceiling" => self.ceiling = parse(v)?,
            "probe.ledger" => self.ledger = path(v),
            "tol.identity" => self.tol_identity = parse(v)?,
            "tol.shift_c" => self.tol_shift_c = parse(v)?,
            "tol.oracle" => self.tol_oracle = parse(v)?,
            "tol.inequality" => self.tol_inequality = parse(v)?,
            "output.path" => self.out = path(v),
            "output.format" => self.format = v.parse()?,
            _ => unreachable!("key list checked by caller"),
        }
        Ok(())
    }

    /// Checks every parameter against the library preconditions.
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=2).contains(&self.n) {
            return Err(format!("grid.n = {} outside [1, 2]", self.n));
        }
        if self.depth == 0 || self.n * self.depth > MAX_LOG_LEAVES {
            return Err(format!(
                "grid.K = {} outside [1, {}] for n = {}",
                self.depth,
                MAX_LOG_LEAVES / self.n,
                self.n
            ));
        }
        if self.pad > self.depth {
            return Err(format!(
                "grid.pad = {} exceeds K = {}",
                self.pad, self.depth
            ));
        }
        if !(1..=16).contains(&self.d) {
            return Err(format!("grid.d = {} outside [1, 16]", self.d));
        }
        if self.samples == 0 || self.samples > 100_000 {
            return Err(format!(
                "ensemble.samples = {} outside [1, 100000]",
                self.samples
            ));
        }
        if !(self.spike_scale >= 0.0 && self.spike_scale.is_finite()) {
            return Err(format!(
                "ensemble.spike_scale = {} must be finite and ≥ 0",
                self.spike_scale
            ));
        }
        if !(-60..=60).contains(&self.s_min) {
            return Err(format!("lacunary.s_min = {} outside [-60, 60]", self.s_min));
        }
        if let Some(s) = self.s_max {
            if s <= self.s_min || s > 60 {
                return Err(format!("lacunary.s_max = {s} must lie in (s_min, 60]"));
            }
            if self.ell_max > s {
                return Err(format!(
                    "lambda.ell_max = {} exceeds lacunary.s_max = {s}",
                    self.ell_max
                ));
            }
        }
        if self.ell_min > self.ell_max {
            return Err(format!(
                "empty λ grid: ell_min {} > ell_max {}",
                self.ell_min, self.ell_max
            ));
        }
        if self.ell_min <= self.s_min {
            return Err(format!(
                "lambda.ell_min = {} must exceed lacunary.s_min = {}",
                self.ell_min, self.s_min
            ));
        }
        if self.ell_max > 60 {
            return Err(format!("lambda.ell_max = {} exceeds 60", self.ell_max));
        }
        if self.op_r.max(self.op_s) >= self.depth {
            return Err(format!(
                "shift complexity ({}, {}) needs K > {}",
                self.op_r,
                self.op_s,
                self.op_r.max(self.op_s)
            ));
        }
        if !(self.op_scale.is_finite()) {
            return Err("operator.scale must be finite".into());
        }
        if self.op_kind == OperatorKind::File && self.op_file.is_none() {
            return Err("operator.kind = file needs operator.file".into());
        }
        if self.op_kind != OperatorKind::File && self.op_file.is_some() {
            return Err("operator.file is only read with operator.kind = file".into());
        }
        if self.dilation_s > self.depth {
            return Err(format!(
                "dilation.s = {} exceeds K = {}",
                self.dilation_s, self.depth
            ));
        }
        for (name, v) in [
            ("probe.alpha_bound", self.alpha_bound),
            ("probe.ceiling", self.ceiling),
            ("tol.identity", self.tol_identity),
            ("tol.shift_c", self.tol_shift_c),
            ("tol.oracle", self.tol_oracle),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} = {v} must be positive and finite"));
            }
        }
        if !(self.tol_inequality >= 0.0 && self.tol_inequality < 1.0) {
            return Err(format!(
                "tol.inequality = {} outside [0, 1)",
                self.tol_inequality
            ));
        }
        if self.jobs > 1024 {
            return Err(format!("jobs = {} exceeds 1024", self.jobs));
        }
        Ok(())
    }
}

pub const KEYS: &[&str] = &[
    "version",
    "experiment",
    "seed",
    "jobs",
    "grid.n",
    "grid.K",
    "grid.d",
    "grid.pad",
    "ensemble.samples",
    "ensemble.spikes",
    "ensemble.spike_scale",
    "lacunary.s_min",
    "lacunary.s_max",
    "lambda.ell_min",
    "lambda.ell_max",
    "operator.kind",
    "operator.side",
    "operator.r",
    "operator.s",
    "operator.scale",
    "operator.file",
    "dilation.s",
    "atoms.kind",
    "probe.part",
    "probe.alpha_bound",
    "probe.upper_rich",
    "probe.ceiling",
    "probe.ledger",
    "tol.identity",
    "tol.shift_c",
    "tol.oracle",
    "tol.inequality",
    "output.path",
    "output.format",
];

pub fn part_name(p: TriPart) -> &'static str {
    match p {
        TriPart::Upper => "upper",
        TriPart::Lower => "lower",
    }
}

fn parse<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

fn path(v: &str) -> Option<PathBuf> {
    (v != "none").then(|| PathBuf::from(v))
}

/// One `key = value` assignment with its source line (0 for flags).
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits config text into assignments; duplicate keys are rejected.
pub fn parse_assignments(text: &str) -> Result<Vec<Assignment>, CliError> {
    let mut out: Vec<Assignment> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| CliError::Config {
            line,
            msg: format!("expected `key = value`, got `{l}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Config {
                line,
                msg: format!("empty key or value in `{l}`"),
            });
        }
        if let Some(prev) = out.iter().find(|a| a.key == k) {
            return Err(CliError::Config {
                line,
                msg: format!("`{k}` already set on line {}", prev.line),
            });
        }
        out.push(Assignment {
            line,
            key: k.into(),
            value: v.into(),
        });
    }
    Ok(out)
}

/// Applies assignments in order (later ones win) and validates the result.
pub fn build_config(assignments: &[Assignment]) -> Result<Config, CliError> {
    let exp = assignments
        .iter()
        .rev()
        .find(|a| a.key == "experiment")
        .ok_or_else(|| CliError::Config {
            line: 0,
            msg: format!("missing `experiment`; valid names: {}", Experiment::names()),
        })?;
    let experiment: Experiment = exp.value.parse().map_err(|msg| CliError::Config {
        line: exp.line,
        msg: format!("experiment {msg}"),
    })?;
    let mut cfg = Config::new(experiment);
    for a in assignments {
        if !KEYS.contains(&a.key.as_str()) {
            return Err(CliError::Config {
                line: a.line,
                msg: format!("unknown key `{}`; valid keys: {}", a.key, KEYS.join(", ")),
            });
        }
        cfg.set(&a.key, &a.value).map_err(|msg| CliError::Config {
            line: a.line,
            msg: format!("{}: {msg}", a.key),
        })?;
    }
    cfg.validate()
        .map_err(|msg| CliError::Config { line: 0, msg })?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<Config, CliError> {
    build_config(&parse_assignments(text)?)
}
