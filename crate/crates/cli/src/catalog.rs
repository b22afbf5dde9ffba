//! The named experiments and their dispatcher.
//!
//! Each experiment turns a validated [`Config`] into a [`ProbeReport`].
//! Per-sample work runs in parallel and is reassembled in sample order, so
//! the report does not depend on the thread count. A sample that errors
//! becomes an `error` record; the rest of the suite still runs.

use std::collections::HashMap;

use nccz::cuculescu::{
    cuculescu_check, cuculescu_run, cz_decompose, delta_formulas_check, lacunary_build, qhat_build,
    required_s_max, row_col_split_with, zeta_build,
};
use nccz::dyadic::{inner, l1_norm, l2_norm, linf_norm, Grid, MatFn};
use nccz::hardy::{
    all_norms, atom_operator_bound, bmo_norms, john_nirenberg_lower, l2_bound,
    paraproduct_bmo_estimate, AtomKind,
};
use nccz::ncalg::Mat;
use nccz::operators::{
    weak_type_scan, AnnihilationInput, HaarShiftSpec, KernelShape, OperatorSpec, PerfectDyadicSpec,
    Side, SmoothKernelSpec, TransformSpec, WeakScanSpec,
};
use nccz::probes::{
    gundy_decompose, leftright_cz, random_fn, random_with_norm, sample_rng, truncation_probe,
    write_ledger, EnsembleSpec, TruncationProbeSpec,
};
use nccz::report::{CheckRecord, ProbeReport};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Config, Experiment, OperatorKind, SideSel};
use crate::error::CliError;
use crate::report::ExperimentResult;

/// Stream for operator coefficients, far from the per-sample streams.
const OPERATOR_STREAM: u64 = 1 << 40;
/// Offset for auxiliary per-sample draws.
const AUX_STREAM: u64 = 1 << 41;
/// John–Nirenberg test functionals per sample.
const JN_DRAWS: usize = 200;
/// Sample errors listed individually before they are summarized.
const MAX_ERROR_RECORDS: usize = 20;

pub fn run_experiment(cfg: &Config) -> Result<ExperimentResult, CliError> {
    cfg.validate()
        .map_err(|msg| CliError::Config { line: 0, msg })?;
    let report = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Config {
                line: 0,
                msg: format!("jobs: {e}"),
            })?
            .install(|| dispatch(cfg))
    } else {
        dispatch(cfg)
    };
    Ok(ExperimentResult::new(cfg, report))
}

fn dispatch(cfg: &Config) -> ProbeReport {
    let ctx = Ctx::new(cfg);
    let mut rep = ProbeReport::new(cfg.experiment.name());
    match cfg.experiment {
        Experiment::CuculescuBounds => ctx.cuculescu_bounds(&mut rep),
        Experiment::CzIdentities => ctx.cz_identities(&mut rep),
        Experiment::LacunaryIdentities => ctx.lacunary_identities(&mut rep),
        Experiment::PerfectDyadicAnnihilation => ctx.annihilation(&mut rep, Family::Perfect),
        Experiment::HaarShiftAnnihilation => ctx.annihilation(&mut rep, Family::Shift),
        Experiment::ShiftL2 => ctx.shift_l2(&mut rep),
        Experiment::DilationLemma => ctx.dilation_lemma(&mut rep),
        Experiment::AtomBounds => ctx.atom_bounds(&mut rep),
        Experiment::TransformParaproduct => ctx.transform_paraproduct(&mut rep),
        Experiment::BmoEstimates => ctx.bmo_estimates(&mut rep),
        Experiment::Gundy => ctx.gundy(&mut rep),
        Experiment::LeftrightCz => ctx.leftright(&mut rep),
        Experiment::TruncationProbe => ctx.truncation(&mut rep),
        Experiment::WeakTypeScan => ctx.weak_scan(&mut rep),
    }
    rep
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    AtMost(f64),
    AtLeast(f64),
    Measured,
}

/// One observed quantity of one sample.
struct Obs {
    name: String,
    anchor: &'static str,
    rule: Rule,
    value: f64,
}

fn obs(name: impl Into<String>, anchor: &'static str, rule: Rule, value: f64) -> Obs {
    Obs {
        name: name.into(),
        anchor,
        rule,
        value,
    }
}

type SampleOut = Result<Vec<Obs>, String>;

/// Folds per-sample observations into one record per name: the maximum for
/// `AtMost` and measured names, the minimum for `AtLeast`. Measured names also
/// keep their per-sample series.
fn tabulate(rep: &mut ProbeReport, outs: Vec<SampleOut>) {
    let mut order: Vec<(String, &'static str, Rule)> = Vec::new();
    let mut values: HashMap<String, Vec<f64>> = HashMap::new();
    let mut errors = Vec::new();
    for (i, out) in outs.into_iter().enumerate() {
        match out {
            Ok(list) => {
                for o in list {
                    let slot = values.entry(o.name.clone()).or_insert_with(|| {
                        order.push((o.name.clone(), o.anchor, o.rule));
                        Vec::new()
                    });
                    slot.push(o.value);
                }
            }
            Err(e) => errors.push((i, e)),
        }
    }
    for (name, anchor, rule) in order {
        let v = &values[&name];
        let rec = match rule {
            Rule::AtMost(b) => CheckRecord::at_most(&name, anchor, fold_max(v), b),
            Rule::AtLeast(b) => CheckRecord::at_least(&name, anchor, fold_min(v), b),
            Rule::Measured => {
                rep.push_series(&name, v.clone());
                CheckRecord::measured(&name, anchor, fold_max(v))
            }
        };
        rep.push(rec);
    }
    push_errors(rep, errors);
}

fn push_errors(rep: &mut ProbeReport, errors: Vec<(usize, String)>) {
    let total = errors.len();
    for (i, e) in errors.into_iter().take(MAX_ERROR_RECORDS) {
        rep.push(CheckRecord::error(
            "sample_error",
            "run.sample",
            format!("sample {i}: {e}"),
        ));
    }
    if total > MAX_ERROR_RECORDS {
        rep.push(CheckRecord::error(
            "sample_error",
            "run.sample",
            format!("{} more failing samples", total - MAX_ERROR_RECORDS),
        ));
    }
}

/// NaN-propagating maximum, so a broken value cannot hide behind a good one.
fn fold_max(v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

fn fold_min(v: &[f64]) -> f64 {
    v.iter().fold(f64::INFINITY, |a, &b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.min(b)
        }
    })
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn lam(ell: i32) -> f64 {
    (ell as f64).exp2()
}

fn absorb(dst: &mut ProbeReport, prefix: &str, src: ProbeReport) {
    for mut r in src.records {
        r.name = format!("{prefix}{}", r.name);
        dst.push(r);
    }
    for (k, v) in src.series {
        dst.push_series(&format!("{prefix}{k}"), v);
    }
}

fn e2s(e: nccz::Error) -> String {
    e.to_string()
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Perfect,
    Shift,
    Atoms,
    Transforms,
    Weak,
}

struct Ctx<'a> {
    cfg: &'a Config,
    g: Grid,
    ens: EnsembleSpec,
    id: Rule,
    ratio: Rule,
    oracle: Rule,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a Config) -> Self {
        let g = cfg.grid();
        Ctx {
            cfg,
            g,
            ens: EnsembleSpec::new(g, cfg.d, cfg.samples, cfg.seed)
                .with_spikes(cfg.spikes, cfg.spike_scale),
            id: Rule::AtMost(cfg.tol_identity),
            ratio: Rule::AtMost(1.0 + cfg.tol_inequality),
            oracle: Rule::AtMost(cfg.tol_oracle),
        }
    }

    fn per_sample(&self, f: impl Fn(usize) -> SampleOut + Sync + Send) -> Vec<SampleOut> {
        (0..self.cfg.samples).into_par_iter().map(f).collect()
    }

    /// Lacunary top level for `f`: configured, or the least admissible one
    /// that also covers the `λ` grid.
    fn s_max_for(&self, f: &MatFn) -> i32 {
        self.cfg.s_max.unwrap_or_else(|| {
            required_s_max(linf_norm(f))
                .max(self.cfg.ell_max)
                .max(self.cfg.s_min + 1)
        })
    }

    fn sides(&self) -> Vec<Side> {
        match self.cfg.op_side {
            SideSel::Column => vec![Side::Column],
            SideSel::Row => vec![Side::Row],
            SideSel::Both => vec![Side::Column, Side::Row],
        }
    }

    fn auto_kinds(&self, fam: Family) -> Vec<OperatorKind> {
        use OperatorKind::*;
        let n1 = self.g.n == 1;
        match fam {
            Family::Perfect => vec![
                PerfectMultiplier,
                PerfectParaproduct,
                PerfectParaproductAdjoint,
                Transform,
                Paraproduct,
                ParaproductAdjoint,
            ],
            Family::Shift => {
                let mut v = vec![RandomShift, IdentityShift];
                if n1 {
                    v.push(Hilbert);
                }
                v
            }
            Family::Atoms => vec![
                Transform,
                Paraproduct,
                ParaproductAdjoint,
                PerfectMultiplier,
                PerfectParaproduct,
                RandomShift,
                Riesz,
            ],
            Family::Transforms => vec![Transform, Paraproduct, ParaproductAdjoint],
            Family::Weak => vec![if n1 { Hilbert } else { RandomShift }],
        }
    }

    /// Operators for a family, one per configured side, labelled
    /// `kind.side`. Coefficients are drawn once and shared by both sides.
    fn operators(&self, fam: Family) -> Result<Vec<(String, OperatorSpec)>, String> {
        let kinds = match self.cfg.op_kind {
            OperatorKind::Auto => self.auto_kinds(fam),
            k => vec![k],
        };
        let mut rng = sample_rng(self.cfg.seed, OPERATOR_STREAM);
        let mut out = Vec::new();
        for kind in kinds {
            let op = self.build_operator(kind, &mut rng)?;
            for side in self.sides() {
                out.push((format!("{}.{}", kind, side.name()), op.with_side(side)));
            }
        }
        Ok(out)
    }

    fn build_operator<R: Rng>(
        &self,
        kind: OperatorKind,
        rng: &mut R,
    ) -> Result<OperatorSpec, String> {
        let (g, d, c) = (self.g, self.cfg.d, self.cfg);
        let side = Side::Column;
        let scale = c.op_scale;
        let op = match kind {
            OperatorKind::Auto => unreachable!("expanded by the caller"),
            OperatorKind::IdentityShift => OperatorSpec::Shift(HaarShiftSpec::identity(g, d, side)),
            OperatorKind::Hilbert => {
                OperatorSpec::Shift(HaarShiftSpec::dyadic_hilbert(g, d, side, scale).map_err(e2s)?)
            }
            OperatorKind::HilbertTranspose => OperatorSpec::Shift(
                HaarShiftSpec::dyadic_hilbert_transpose(g, d, side, scale).map_err(e2s)?,
            ),
            OperatorKind::RandomShift => OperatorSpec::Shift(
                HaarShiftSpec::random_normalized(rng, g, d, c.op_r, c.op_s, side).map_err(e2s)?,
            ),
            OperatorKind::PerfectMultiplier => OperatorSpec::Perfect(
                PerfectDyadicSpec::haar_multiplier(g, d, random_levels(rng, g, d, scale), side)
                    .map_err(e2s)?,
            ),
            OperatorKind::PerfectParaproduct => OperatorSpec::Perfect(
                PerfectDyadicSpec::paraproduct(random_fn(rng, g, d).scale(scale), side),
            ),
            OperatorKind::PerfectParaproductAdjoint => OperatorSpec::Perfect(
                PerfectDyadicSpec::paraproduct_adjoint(random_fn(rng, g, d).scale(scale), side),
            ),
            OperatorKind::Transform => OperatorSpec::Transform(
                TransformSpec::from_levels(g, d, random_levels(rng, g, d, scale), side)
                    .map_err(e2s)?,
            ),
            OperatorKind::Paraproduct => OperatorSpec::Transform(TransformSpec::paraproduct(
                random_fn(rng, g, d).scale(scale),
                side,
            )),
            OperatorKind::ParaproductAdjoint => OperatorSpec::Transform(
                TransformSpec::paraproduct_adjoint(random_fn(rng, g, d).scale(scale), side),
            ),
            OperatorKind::Riesz => OperatorSpec::Smooth(
                SmoothKernelSpec::new(
                    g,
                    KernelShape::Riesz { axis: 0 },
                    Mat::scalar(d, scale),
                    side,
                )
                .map_err(e2s)?,
            ),
            OperatorKind::Sign => OperatorSpec::Smooth(
                SmoothKernelSpec::new(g, KernelShape::Sign, Mat::scalar(d, scale), side)
                    .map_err(e2s)?,
            ),
            OperatorKind::File => {
                let path = c.op_file.as_ref().expect("validated");
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                let op = OperatorSpec::from_text(&text).map_err(e2s)?;
                if op.grid() != g || op.dim() != d {
                    return Err(format!(
                        "{} is for grid (n={}, K={}, pad={}), d={}; config has (n={}, K={}, pad={}), d={}",
                        path.display(),
                        op.grid().n,
                        op.grid().depth,
                        op.grid().pad,
                        op.dim(),
                        g.n,
                        g.depth,
                        g.pad,
                        d
                    ));
                }
                op
            }
        };
        Ok(op)
    }

    fn setup_error(&self, rep: &mut ProbeReport, msg: String) {
        rep.push(CheckRecord::error("setup", "run.setup", msg));
    }

    fn cuculescu_bounds(&self, rep: &mut ProbeReport) {
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let scale = linf_norm(&f).max(1.0);
            let mut v = Vec::new();
            for ell in self.cfg.ells() {
                let seq = cuculescu_run(&f, lam(ell)).map_err(e2s)?;
                let c = cuculescu_check(&f, &seq);
                v.push(obs(
                    "decreasing",
                    "cuculescu.decreasing",
                    self.id,
                    c.decreasing,
                ));
                v.push(obs(
                    "commutation",
                    "cuculescu.commutation",
                    self.id,
                    c.commutation / scale,
                ));
                v.push(obs(
                    "level_gap",
                    "cuculescu.level",
                    Rule::AtLeast(-self.cfg.tol_identity),
                    c.level_gap / scale,
                ));
                v.push(obs(
                    "p_orthogonality",
                    "cuculescu.p_orthogonal",
                    self.id,
                    c.p_orthogonality,
                ));
                v.push(obs("p_sum", "cuculescu.p_sum", self.id, c.p_sum));
                v.push(obs(
                    "defect_ratio",
                    "cuculescu.weak_defect",
                    self.ratio,
                    ratio(c.weighted_defect, c.f_l1),
                ));
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn cz_identities(&self, rep: &mut ProbeReport) {
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let mut v = Vec::new();
            for ell in self.cfg.ells() {
                let parts = cz_decompose(&f, lam(ell)).map_err(e2s)?;
                let dg = parts.diagnostics(&f);
                let dr = delta_formulas_check(&f, &parts);
                v.push(obs("sum", "cz.sum", self.id, dg.sum_residual));
                v.push(obs(
                    "g_off_series",
                    "cz.g_off_series",
                    self.id,
                    dg.series_residual,
                ));
                v.push(obs("delta_b_d", "cz.delta_b_d", self.id, dr.b_d_formula));
                v.push(obs(
                    "delta_g_off",
                    "cz.delta_g_off",
                    self.id,
                    dr.g_off_formula,
                ));
                let comp = dr.compression.iter().fold(0.0f64, |a, &b| a.max(b));
                v.push(obs("compression", "cz.compression", self.id, comp));
                let gd = ratio(dg.g_d_l2_sq, dg.g_d_bound);
                if dg.root_admissible {
                    v.push(obs("g_d_l2", "cz.g_d_l2", self.ratio, gd));
                } else {
                    v.push(obs(
                        "g_d_l2_inadmissible_root",
                        "cz.g_d_l2",
                        Rule::Measured,
                        gd,
                    ));
                }
                v.push(obs(
                    "b_d_l1",
                    "cz.b_d_l1",
                    self.ratio,
                    ratio(dg.b_d_l1_sum, dg.b_d_bound),
                ));
                if self.cfg.d == 1 {
                    let off = parts.g_off.max_frob().max(parts.b_off.max_frob());
                    v.push(obs(
                        "scalar_off_diagonal",
                        "cz.scalar_collapse",
                        self.id,
                        off,
                    ));
                }
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn lacunary_identities(&self, rep: &mut ProbeReport) {
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let f_l1 = l1_norm(&f);
            let fam = lacunary_build(&f, self.cfg.s_min, self.s_max_for(&f)).map_err(e2s)?;
            let c = fam.check(&f).map_err(e2s)?;
            let mut v = vec![
                obs(
                    "pi_idempotent",
                    "lacunary.pi_idempotent",
                    self.id,
                    c.pi_idempotent,
                ),
                obs(
                    "pi_orthogonal",
                    "lacunary.pi_orthogonal",
                    self.id,
                    c.pi_orthogonal,
                ),
                obs("partition", "lacunary.partition", self.id, c.partition),
                obs(
                    "nesting",
                    "lacunary.nesting",
                    self.id,
                    c.nesting_j.max(c.nesting_k),
                ),
                obs(
                    "key_identity_qhat",
                    "lacunary.key_qhat",
                    self.id,
                    c.key_identity_qhat,
                ),
                obs(
                    "key_identity_p",
                    "lacunary.key_p",
                    self.id,
                    c.key_identity_p,
                ),
                obs(
                    "psi_df",
                    "lacunary.psi_df",
                    self.ratio,
                    ratio(c.psi_df, c.psi_df_bound),
                ),
            ];
            let split = row_col_split_with(&f, &fam).map_err(e2s)?;
            let back = split.f_r.add(&split.f_c).add(&split.residual);
            v.push(obs("split", "lacunary.split", self.id, back.max_dist(&f)));
            v.push(obs(
                "residual",
                "lacunary.residual",
                self.ratio,
                ratio(split.residual_linf, split.residual_bound),
            ));
            for ell in self.cfg.ells() {
                let qh = qhat_build(&fam, ell).map_err(e2s)?;
                v.push(obs(
                    "qhat_defect",
                    "qhat.weak_defect",
                    self.ratio,
                    ratio(lam(ell) * qh.defect(), 2.0 * f_l1),
                ));
                v.push(obs(
                    "qhat_below_levels",
                    "qhat.below_levels",
                    self.id,
                    qh.below_levels_deviation(),
                ));
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn dilation_lemma(&self, rep: &mut ProbeReport) {
        let s = self.cfg.dilation_s;
        let n = self.g.n;
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let f_l1 = l1_norm(&f);
            let fam = lacunary_build(&f, self.cfg.s_min, self.s_max_for(&f)).map_err(e2s)?;
            let mut v = Vec::new();
            for ell in self.cfg.ells() {
                let qh = qhat_build(&fam, ell).map_err(e2s)?;
                let z = zeta_build(&qh, s).map_err(e2s)?;
                let bound = ((s * n + 1) as f64).exp2() * f_l1;
                v.push(obs(
                    "zeta_defect",
                    "dilation.weak_defect",
                    self.ratio,
                    ratio(lam(ell) * z.defect(), bound),
                ));
                v.push(obs(
                    "dominance",
                    "dilation.dominance",
                    self.id,
                    z.dominance_deviation(&qh),
                ));
                v.push(obs(
                    "nested_rho",
                    "dilation.nested_rho",
                    self.id,
                    z.nested_rho_overlap(),
                ));
                if s == 0 {
                    let dist = z.zeta.max_dist(&qh.q_final());
                    v.push(obs("zeta_equals_qhat", "dilation.s0", self.id, dist));
                }
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn annihilation(&self, rep: &mut ProbeReport, fam: Family) {
        let ops = match self.operators(fam) {
            Ok(o) => o,
            Err(e) => return self.setup_error(rep, e),
        };
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let fam = lacunary_build(&f, self.cfg.s_min, self.s_max_for(&f)).map_err(e2s)?;
            let ells = self.cfg.ells();
            // The truncated pieces depend on (λ, side) only; share them across operators.
            let mut inputs: Vec<[Option<AnnihilationInput>; 2]> = Vec::with_capacity(ells.len());
            for &ell in &ells {
                let mut pair = [None, None];
                for (j, side) in [Side::Column, Side::Row].into_iter().enumerate() {
                    if ops.iter().any(|(_, op)| op.side() == side) {
                        pair[j] = Some(AnnihilationInput::new(&f, &fam, ell, side).map_err(e2s)?);
                    }
                }
                inputs.push(pair);
            }
            let mut v = Vec::new();
            for (label, op) in &ops {
                let kernel = match op {
                    OperatorSpec::Perfect(p) => {
                        Some((p.apply(&f), p.apply_kernel(&f), "perfect.kernel_path"))
                    }
                    OperatorSpec::Shift(sh) => {
                        Some((sh.apply(&f), sh.apply_kernel(&f), "shift.kernel_path"))
                    }
                    _ => None,
                };
                if let Some((a, b, anchor)) = kernel {
                    let (a, b) = (a.map_err(e2s)?, b.map_err(e2s)?);
                    let rel = a.max_dist(&b) / a.max_frob().max(1.0);
                    v.push(obs(
                        format!("{label}.kernel_path"),
                        anchor,
                        self.oracle,
                        rel,
                    ));
                }
                let j = usize::from(op.side() == Side::Row);
                for pair in &inputs {
                    let input = pair[j].as_ref().expect("built for every side in use");
                    let r = input.check(op).map_err(e2s)?;
                    v.push(obs(
                        format!("{label}.truncation_qhat"),
                        "annihilation.truncation",
                        self.id,
                        r.truncation_qhat,
                    ));
                    if let Some(x) = r.operator_qhat {
                        v.push(obs(
                            format!("{label}.operator_qhat"),
                            "annihilation.operator",
                            self.id,
                            x,
                        ));
                    }
                    if let Some(x) = r.shift_c {
                        v.push(obs(
                            format!("{label}.shift_c"),
                            "annihilation.shift_c",
                            Rule::AtMost(self.cfg.tol_shift_c),
                            x,
                        ));
                    }
                    if let Some(x) = r.shift_a_qhat {
                        v.push(obs(
                            format!("{label}.shift_a_qhat"),
                            "annihilation.shift_a",
                            self.id,
                            x,
                        ));
                    }
                    if let Some(x) = r.shift_b_zeta {
                        v.push(obs(
                            format!("{label}.shift_b_zeta"),
                            "annihilation.shift_b",
                            self.id,
                            x,
                        ));
                    }
                }
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    /// `‖T f‖₂ / (C ‖f‖₂)` with a known bound `C`, else measured `‖T f‖₂/‖f‖₂`.
    fn l2_obs(
        &self,
        label: &str,
        op: &OperatorSpec,
        f: &MatFn,
        v: &mut Vec<Obs>,
    ) -> Result<(), String> {
        let tf = l2_norm(&op.apply(f).map_err(e2s)?);
        let nf = l2_norm(f);
        match l2_bound(op) {
            Some(c) => v.push(obs(
                format!("{label}.l2"),
                "operator.l2",
                self.ratio,
                ratio(tf, c * nf),
            )),
            None => v.push(obs(
                format!("{label}.l2_ratio"),
                "operator.l2",
                Rule::Measured,
                ratio(tf, nf),
            )),
        }
        Ok(())
    }

    fn shift_l2(&self, rep: &mut ProbeReport) {
        let c = self.cfg;
        if c.op_kind != OperatorKind::Auto {
            let ops = match self.operators(Family::Shift) {
                Ok(o) => o,
                Err(e) => return self.setup_error(rep, e),
            };
            let outs = self.per_sample(|i| {
                let f = random_fn(&mut self.ens.rng(i), self.g, c.d);
                let mut v = Vec::new();
                for (label, op) in &ops {
                    self.l2_obs(label, op, &f, &mut v)?;
                }
                Ok(v)
            });
            return tabulate(rep, outs);
        }
        let mut complexities = vec![(0, 0), (0, 1), (1, 0), (1, 1), (c.op_r, c.op_s)];
        complexities.retain(|&(r, s)| r.max(s) < c.depth);
        complexities.sort_unstable();
        complexities.dedup();
        if self.g.n == 1 {
            match HaarShiftSpec::dyadic_hilbert(self.g, c.d, Side::Column, c.op_scale) {
                Ok(h) => rep.push(CheckRecord::measured(
                    "hilbert.overshoot",
                    "shift.normalization",
                    h.overshoot(),
                )),
                Err(e) => self.setup_error(rep, e.to_string()),
            }
        }
        let sides = self.sides();
        let outs = self.per_sample(|i| {
            let mut rng = self.ens.rng(i);
            let f = random_fn(&mut rng, self.g, c.d);
            let nf = l2_norm(&f);
            let mut v = Vec::new();
            for &(r, s) in &complexities {
                for &side in &sides {
                    let sh = HaarShiftSpec::random_normalized(&mut rng, self.g, c.d, r, s, side)
                        .map_err(e2s)?;
                    let label = format!("shift_{r}_{s}.{}", side.name());
                    let out = sh.apply(&f).map_err(e2s)?;
                    v.push(obs(
                        format!("{label}.l2"),
                        "shift.l2",
                        self.ratio,
                        ratio(l2_norm(&out), nf),
                    ));
                    let dense = sh.apply_kernel(&f).map_err(e2s)?;
                    let rel = out.max_dist(&dense) / out.max_frob().max(1.0);
                    v.push(obs(
                        format!("{label}.kernel_path"),
                        "shift.kernel_path",
                        self.oracle,
                        rel,
                    ));
                }
            }
            if self.g.n == 1 {
                let h = HaarShiftSpec::dyadic_hilbert(self.g, c.d, Side::Column, c.op_scale)
                    .map_err(e2s)?;
                let out = h.apply(&f).map_err(e2s)?;
                v.push(obs(
                    "hilbert.l2_ratio",
                    "shift.l2",
                    Rule::Measured,
                    ratio(l2_norm(&out), nf),
                ));
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn atom_bounds(&self, rep: &mut ProbeReport) {
        let ops = match self.operators(Family::Atoms) {
            Ok(o) => o,
            Err(e) => return self.setup_error(rep, e),
        };
        let kinds: Vec<AtomKind> = match self.cfg.atom_kind {
            Some(k) => vec![k],
            None => AtomKind::ALL.to_vec(),
        };
        let ens = EnsembleSpec::new(self.g, self.cfg.d, self.cfg.samples, self.cfg.seed);
        for (label, op) in &ops {
            for &kind in &kinds {
                let prefix = format!("{label}.{}.", kind.name());
                match atom_operator_bound(op, kind, &ens) {
                    Ok((r, _)) => absorb(rep, &prefix, r),
                    Err(e) => rep.push(CheckRecord::error(
                        &format!("{prefix}run"),
                        "atoms.run",
                        e.to_string(),
                    )),
                }
            }
        }
    }

    fn transform_paraproduct(&self, rep: &mut ProbeReport) {
        let ops = match self.operators(Family::Transforms) {
            Ok(o) => o,
            Err(e) => return self.setup_error(rep, e),
        };
        let outs = self.per_sample(|i| {
            let mut rng = self.ens.rng(i);
            let f = random_fn(&mut rng, self.g, self.cfg.d);
            let h = random_fn(&mut rng, self.g, self.cfg.d);
            let mut v = Vec::new();
            for (label, op) in &ops {
                self.l2_obs(label, op, &f, &mut v)?;
                let tf = op.apply(&f).map_err(e2s)?;
                let mirror = op.conjugate_side().apply(&f.adjoint()).map_err(e2s)?;
                let rel = tf.adjoint().max_dist(&mirror) / tf.max_frob().max(1.0);
                v.push(obs(
                    format!("{label}.side_symmetry"),
                    "operator.side_symmetry",
                    self.oracle,
                    rel,
                ));
                if let OperatorSpec::Transform(t) = op {
                    let lhs = inner(&tf, &h);
                    let rhs = inner(&f, &t.adjoint().apply(&h).map_err(e2s)?);
                    let rel = (lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm()));
                    v.push(obs(
                        format!("{label}.duality"),
                        "transform.duality",
                        self.oracle,
                        rel,
                    ));
                }
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn bmo_estimates(&self, rep: &mut ProbeReport) {
        let c = self.cfg;
        let mut rng = sample_rng(c.seed, OPERATOR_STREAM);
        let rho = random_fn(&mut rng, self.g, c.d).scale(c.op_scale);
        let ens = EnsembleSpec::new(self.g, c.d, c.samples, c.seed);
        match paraproduct_bmo_estimate(&rho, &ens) {
            Ok((r, _)) => absorb(rep, "paraproduct.", r),
            Err(e) => self.setup_error(rep, e.to_string()),
        }
        let outs = self.per_sample(|i| {
            let mut rng = sample_rng(c.seed, AUX_STREAM + i as u64);
            let f = random_fn(&mut rng, self.g, c.d);
            let bmo = bmo_norms(&f).bmo_cond().ok_or("bmo undefined")?;
            let lower = john_nirenberg_lower(&f, JN_DRAWS, &mut rng);
            let mut v = vec![obs(
                "john_nirenberg",
                "bmo.john_nirenberg",
                self.ratio,
                ratio(lower, bmo),
            )];
            let a = all_norms(&f, &[]).map_err(e2s)?;
            let b = all_norms(&f.adjoint(), &[]).map_err(e2s)?;
            let pairs = [
                (a.h1_row, b.h1_col),
                (a.h1_col, b.h1_row),
                (a.h1_row_cond, b.h1_col_cond),
                (a.bmo_row, b.bmo_col),
                (a.bmo_row_cond, b.bmo_col_cond),
                (a.h1_diag, b.h1_diag),
                (a.bmo_diag, b.bmo_diag),
            ];
            let mut worst = 0.0f64;
            for (x, y) in pairs {
                let (x, y) = (x.ok_or("norm missing")?, y.ok_or("norm missing")?);
                worst = worst.max((x - y).abs() / (1.0 + x.abs()));
            }
            v.push(obs(
                "adjoint_symmetry",
                "norms.adjoint_symmetry",
                self.oracle,
                worst,
            ));
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn gundy(&self, rep: &mut ProbeReport) {
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let mut v = Vec::new();
            for ell in self.cfg.ells() {
                let r = gundy_decompose(&f, lam(ell))
                    .and_then(|p| p.report(&f))
                    .map_err(e2s)?;
                v.push(obs("sum", "gundy.sum", self.id, r.sum_residual));
                v.push(obs("support", "gundy.support", self.id, r.supp_residual));
                v.push(obs(
                    "alpha_ratio",
                    "gundy.alpha",
                    Rule::Measured,
                    r.alpha_ratio,
                ));
                v.push(obs(
                    "beta_ratio",
                    "gundy.beta",
                    Rule::Measured,
                    r.beta_ratio,
                ));
                v.push(obs(
                    "gamma_ratio",
                    "gundy.gamma",
                    Rule::Measured,
                    r.gamma_ratio,
                ));
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn leftright(&self, rep: &mut ProbeReport) {
        let outs = self.per_sample(|i| {
            let f = self.ens.sample(i);
            let s_max = self.s_max_for(&f);
            let mut v = Vec::new();
            for ell in self.cfg.ells() {
                let r = leftright_cz(&f, self.cfg.s_min, s_max, ell)
                    .map_err(e2s)?
                    .report(&f);
                let split = r.split_residual[0].max(r.split_residual[1]);
                v.push(obs("split", "leftright.split", self.id, split));
                v.push(obs(
                    "g_r_ratio",
                    "leftright.good_row",
                    Rule::Measured,
                    r.g_r_ratio,
                ));
                v.push(obs(
                    "g_c_ratio",
                    "leftright.good_col",
                    Rule::Measured,
                    r.g_c_ratio,
                ));
                v.push(obs(
                    "bad_ratio",
                    "leftright.bad",
                    Rule::Measured,
                    r.bad_ratio,
                ));
            }
            Ok(v)
        });
        tabulate(rep, outs);
    }

    fn truncation(&self, rep: &mut ProbeReport) {
        let c = self.cfg;
        let spec = TruncationProbeSpec {
            ensemble: self.ens,
            s_min: c.s_min,
            s_max: c.s_max,
            part: c.part,
            alpha_bound: c.alpha_bound,
            upper_rich: c.upper_rich,
        };
        let out = match truncation_probe(&spec) {
            Ok(o) => o,
            Err(e) => return self.setup_error(rep, e.to_string()),
        };
        absorb(rep, "", out.report);
        rep.push(CheckRecord::measured(
            "ledger_records",
            "truncation.ledger",
            out.ledger.len() as f64,
        ));
        rep.push(CheckRecord::measured(
            "skipped",
            "truncation.skipped",
            out.skipped as f64,
        ));
        if let Some(path) = &c.ledger {
            if let Err(e) = write_ledger(path, &out.ledger) {
                rep.push(CheckRecord::error(
                    "ledger_write",
                    "truncation.ledger",
                    e.to_string(),
                ));
            }
        }
    }

    fn weak_scan(&self, rep: &mut ProbeReport) {
        let ops = match self.operators(Family::Weak) {
            Ok(o) => o,
            Err(e) => return self.setup_error(rep, e),
        };
        // the scan applies both sides itself
        let Some((label, op)) = ops.into_iter().next() else {
            return self.setup_error(rep, "no operator".into());
        };
        let label = label
            .rsplit_once('.')
            .map_or(label.clone(), |(k, _)| k.to_string());
        let spec = WeakScanSpec {
            ensemble: self.ens,
            s_min: self.cfg.s_min,
            s_max: self.cfg.s_max,
            ell_min: self.cfg.ell_min,
            ell_max: self.cfg.ell_max,
            ceiling: self.cfg.ceiling,
        };
        match weak_type_scan(&op, &spec) {
            Ok((r, _)) => absorb(rep, &format!("{label}."), r),
            Err(e) => self.setup_error(rep, e.to_string()),
        }
    }
}

fn random_levels<R: Rng>(rng: &mut R, g: Grid, d: usize, norm: f64) -> Vec<Vec<Mat>> {
    (0..g.depth)
        .map(|k| {
            (0..g.cubes_at(k))
                .map(|_| {
                    let u: f64 = rng.random();
                    random_with_norm(rng, d, norm * u)
                })
                .collect()
        })
        .collect()
}
