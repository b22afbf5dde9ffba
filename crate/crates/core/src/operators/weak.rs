use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::OperatorSpec;
use super::transform::Side;
use crate::cuculescu::{required_s_max, row_col_split};
use crate::dyadic::{l1_norm, linf_norm, weak_l1_tail, MatFn};
use crate::error::{Error, Result};
use crate::probes::EnsembleSpec;
use crate::report::{max_of, CheckRecord, ProbeReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakScanSpec {
    pub ensemble: EnsembleSpec,
    pub s_min: i32,
    /// `None` picks the smallest admissible value per sample.
    pub s_max: Option<i32>,
    /// `λ = 2^ℓ` for `ℓ_min ≤ ℓ ≤ ℓ_max`.
    pub ell_min: i32,
    pub ell_max: i32,
    /// Sanity ceiling on the ratios; reported, never asserted.
    pub ceiling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakSample {
    pub f_l1: f64,
    /// `sup_λ [λφ{|T_r f_r| > λ} + λφ{|T_c f_c| > λ}] / ‖f‖₁`.
    pub ratio: f64,
    /// `sup_λ λφ{|T_c Ψ| > λ} / ‖f‖₁`.
    pub residual_ratio: f64,
    /// `sup_λ λφ{|T_c f| > λ} / ‖f‖₁`, the unsplit column operator.
    pub direct_ratio: f64,
    pub psi_linf: f64,
}

/// Weak-type ratios of one sample over the `λ` grid.
pub fn weak_type_sample(
    op: &OperatorSpec,
    f: &MatFn,
    s_min: i32,
    s_max: i32,
    ells: &[i32],
) -> Result<WeakSample> {
    let (_, split) = row_col_split(f, s_min, s_max)?;
    let tr = op.with_side(Side::Row).apply(&split.f_r)?;
    let tc = op.with_side(Side::Column).apply(&split.f_c)?;
    let tpsi = op.with_side(Side::Column).apply(&split.residual)?;
    let tf = op.with_side(Side::Column).apply(f)?;
    let f_l1 = l1_norm(f);
    let norm = |x: f64| if f_l1 > 0.0 { x / f_l1 } else { 0.0 };
    let mut ratio = 0.0f64;
    let mut residual_ratio = 0.0f64;
    let mut direct_ratio = 0.0f64;
    for &ell in ells {
        let lam = (ell as f64).exp2();
        ratio = ratio.max(norm(weak_l1_tail(&tr, lam)? + weak_l1_tail(&tc, lam)?));
        residual_ratio = residual_ratio.max(norm(weak_l1_tail(&tpsi, lam)?));
        direct_ratio = direct_ratio.max(norm(weak_l1_tail(&tf, lam)?));
    }
    Ok(WeakSample {
        f_l1,
        ratio,
        residual_ratio,
        direct_ratio,
        psi_linf: split.residual_linf,
    })
}

pub fn weak_type_scan(
    op: &OperatorSpec,
    spec: &WeakScanSpec,
) -> Result<(ProbeReport, Vec<WeakSample>)> {
    spec.ensemble.validate()?;
    if spec.ell_min > spec.ell_max {
        return Err(Error::Invalid(format!(
            "empty λ grid: ℓ ∈ [{}, {}]",
            spec.ell_min, spec.ell_max
        )));
    }
    if op.grid() != spec.ensemble.grid || op.dim() != spec.ensemble.d {
        return Err(Error::Mismatch(
            "operator and ensemble disagree on grid or d".into(),
        ));
    }
    let ells: Vec<i32> = (spec.ell_min..=spec.ell_max).collect();
    let samples: Vec<WeakSample> = (0..spec.ensemble.samples)
        .into_par_iter()
        .map(|i| {
            let f = spec.ensemble.sample(i);
            let s_max = spec
                .s_max
                .unwrap_or_else(|| required_s_max(linf_norm(&f)).max(spec.s_min + 1));
            weak_type_sample(op, &f, spec.s_min, s_max, &ells)
        })
        .collect::<Result<_>>()?;
    let mut report = ProbeReport::new("weak_type_scan");
    let worst = max_of(samples.iter().map(|s| s.ratio));
    let mut rec = CheckRecord::measured("max_split_ratio", "weak.split_ratio", worst);
    rec.bound = Some(spec.ceiling);
    if worst > spec.ceiling {
        rec = rec.with_note("above sanity ceiling");
    }
    report.push(rec);
    report.push(CheckRecord::measured(
        "max_residual_ratio",
        "weak.residual_ratio",
        max_of(samples.iter().map(|s| s.residual_ratio)),
    ));
    report.push(CheckRecord::measured(
        "max_direct_ratio",
        "weak.direct_ratio",
        max_of(samples.iter().map(|s| s.direct_ratio)),
    ));
    report.push_series("ratio", samples.iter().map(|s| s.ratio).collect());
    report.push_series(
        "residual_ratio",
        samples.iter().map(|s| s.residual_ratio).collect(),
    );
    report.push_series(
        "direct_ratio",
        samples.iter().map(|s| s.direct_ratio).collect(),
    );
    Ok((report, samples))
}
