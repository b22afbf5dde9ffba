use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{gaussian_mat, random_bounded_fn, EnsembleSpec};
use crate::cuculescu::{
    lacunary_build, required_s_max, triangular_truncate, LacunaryFamily, TriPart,
};
use crate::dyadic::{expect, l1_norm, linf_norm, to_text, MatFn};
use crate::error::{Error, Result};
use crate::report::{max_of, CheckRecord, ProbeReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationProbeSpec {
    /// Drives the lacunary projections defining `Tr_k`.
    pub ensemble: EnsembleSpec,
    pub s_min: i32,
    /// `None` picks the smallest admissible value per sample.
    pub s_max: Option<i32>,
    pub part: TriPart,
    /// `‖α_k‖_∞` ceiling.
    pub alpha_bound: f64,
    /// Draw `β_k` already upper-truncated by `Tr_k`.
    pub upper_rich: bool,
}

/// One maximum-exceeding sample, with everything needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub sample: usize,
    pub seed: u64,
    pub d: usize,
    pub part: TriPart,
    pub s_min: i32,
    pub s_max: i32,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub driver: String,
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TruncationOutcome {
    pub report: ProbeReport,
    pub ledger: Vec<LedgerRecord>,
    /// Ratios dropped for a zero denominator.
    pub skipped: usize,
}

/// `(R₁, R₂)`; `None` where the denominator vanishes.
pub fn truncation_ratios(
    fam: &LacunaryFamily,
    alphas: &[MatFn],
    betas: &[MatFn],
    part: TriPart,
) -> Result<(Option<f64>, Option<f64>)> {
    if alphas.len() != betas.len() || alphas.len() != fam.grid.depth as usize {
        return Err(Error::Mismatch(format!(
            "need one (α_k, β_k) pair per k = 1..{}, got {}/{}",
            fam.grid.depth,
            alphas.len(),
            betas.len()
        )));
    }
    let mut total = MatFn::zeros(fam.grid, fam.d);
    let mut den1 = 0.0;
    let mut beta_l1 = 0.0;
    let mut alpha_sup = 0.0f64;
    for (i, (a, b)) in alphas.iter().zip(betas).enumerate() {
        let tr = triangular_truncate(b, fam, i as u32, part)?;
        match part {
            TriPart::Upper => {
                total.add_assign(&a.mul(&tr));
                den1 += l1_norm(&a.mul(b));
            }
            TriPart::Lower => {
                total.add_assign(&tr.mul(a));
                den1 += l1_norm(&b.mul(a));
            }
        }
        beta_l1 += l1_norm(b);
        alpha_sup = alpha_sup.max(linf_norm(a));
    }
    let num = l1_norm(&total);
    let den2 = alpha_sup * beta_l1;
    let ratio = |den: f64| (den > f64::MIN_POSITIVE).then(|| num / den);
    Ok((ratio(den1), ratio(den2)))
}

struct Sample {
    s_max: i32,
    driver: MatFn,
    alphas: Vec<MatFn>,
    betas: Vec<MatFn>,
    r1: Option<f64>,
    r2: Option<f64>,
}

fn run_sample(spec: &TruncationProbeSpec, i: usize) -> Result<Sample> {
    let mut rng = spec.ensemble.rng(i);
    let e = &spec.ensemble;
    let driver = super::ensemble::random_positive(&mut rng, e.grid, e.d, e.spikes, e.spike_scale);
    let s_max = spec
        .s_max
        .unwrap_or_else(|| required_s_max(linf_norm(&driver)).max(spec.s_min + 1));
    let fam = lacunary_build(&driver, spec.s_min, s_max)?;
    let mut alphas = Vec::with_capacity(e.grid.depth as usize);
    let mut betas = Vec::with_capacity(e.grid.depth as usize);
    for k in 1..=e.grid.depth {
        // α_k adapted to generation k−1, as for transform coefficients
        let raw = random_bounded_fn(&mut rng, e.grid, e.d, spec.alpha_bound);
        alphas.push(expect(&raw, k - 1)?);
        let vals = (0..e.grid.leaves())
            .map(|_| gaussian_mat(&mut rng, e.d))
            .collect();
        let g = MatFn::new(e.grid, e.d, vals)?;
        let b = if spec.upper_rich {
            triangular_truncate(&g, &fam, k - 1, TriPart::Upper)?
        } else {
            g
        };
        betas.push(b);
    }
    let (r1, r2) = truncation_ratios(&fam, &alphas, &betas, spec.part)?;
    Ok(Sample {
        s_max,
        driver,
        alphas,
        betas,
        r1,
        r2,
    })
}

/// Random search over `(α_k, β_k)` for large `R₁`, `R₂`.
pub fn truncation_probe(spec: &TruncationProbeSpec) -> Result<TruncationOutcome> {
    spec.ensemble.validate()?;
    if !(spec.alpha_bound > 0.0) || !spec.alpha_bound.is_finite() {
        return Err(Error::Invalid(format!(
            "α bound must be positive, got {}",
            spec.alpha_bound
        )));
    }
    let samples: Vec<Sample> = (0..spec.ensemble.samples)
        .into_par_iter()
        .map(|i| run_sample(spec, i))
        .collect::<Result<_>>()?;

    let mut ledger = Vec::new();
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut skipped = 0;
    let mut r1s = Vec::new();
    let mut r2s = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        skipped += s.r1.is_none() as usize + s.r2.is_none() as usize;
        let up1 = s.r1.is_some_and(|r| r > best.0);
        let up2 = s.r2.is_some_and(|r| r > best.1);
        if let Some(r) = s.r1 {
            r1s.push(r);
            best.0 = best.0.max(r);
        }
        if let Some(r) = s.r2 {
            r2s.push(r);
            best.1 = best.1.max(r);
        }
        if up1 || up2 {
            ledger.push(LedgerRecord {
                sample: i,
                seed: spec.ensemble.seed,
                d: spec.ensemble.d,
                part: spec.part,
                s_min: spec.s_min,
                s_max: s.s_max,
                r1: s.r1,
                r2: s.r2,
                driver: to_text(&s.driver),
                alpha: s.alphas.iter().map(to_text).collect(),
                beta: s.betas.iter().map(to_text).collect(),
            });
        }
    }
    let mut report = ProbeReport::new("truncation_probe");
    report.push(CheckRecord::measured(
        "max_r1",
        "truncation.r1",
        max_of(r1s.iter().copied()),
    ));
    report.push(CheckRecord::measured(
        "max_r2",
        "truncation.r2",
        max_of(r2s.iter().copied()),
    ));
    report.push(CheckRecord::measured(
        "skipped",
        "truncation.zero_denominator",
        skipped as f64,
    ));
    report.push_series("r1", r1s);
    report.push_series("r2", r2s);
    Ok(TruncationOutcome {
        report,
        ledger,
        skipped,
    })
}

/// Appends the records as JSON lines.
pub fn write_ledger(path: &Path, records: &[LedgerRecord]) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("{}: {e}", path.display()));
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io)?;
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(file, "{line}").map_err(io)?;
    }
    Ok(())
}

pub fn read_ledger(text: &str) -> Result<Vec<LedgerRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}
