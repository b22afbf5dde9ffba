use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::atoms::{hansen_sides, random_atom, verify_atom, AtomKind};
use super::norms::{bmo_norms, hardy_norms};
use crate::dyadic::{
    differences, expect, expectations, l1_norm, l2_norm, linf_norm, phi_trace, MatFn,
};
use crate::error::Result;
use crate::ncalg::{Mat, C64};
use crate::operators::{OperatorSpec, PerfectKind, Side, TransformKind, TransformSpec};
use crate::probes::{gaussian_vec, random_fn, EnsembleSpec};
use crate::report::{max_of, CheckRecord, ProbeReport};

/// `(Σ_k ‖Δ_k ρ‖_∞²)^{1/2}`, an upper bound for `‖Π_ρ‖_{2→2}` on either side.
pub fn paraproduct_l2_bound(rho: &MatFn) -> f64 {
    differences(rho)[1..]
        .iter()
        .map(|d| linf_norm(d).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Known upper bound for `‖T‖_{2→2}`, when there is one.
pub fn l2_bound(op: &OperatorSpec) -> Option<f64> {
    match op {
        OperatorSpec::Transform(t) => match &t.kind {
            TransformKind::Transform { .. } => t.sup_coefficient(),
            TransformKind::Paraproduct { rho } | TransformKind::ParaproductAdjoint { rho } => {
                Some(paraproduct_l2_bound(rho))
            }
        },
        OperatorSpec::Perfect(p) => match &p.kind {
            PerfectKind::HaarMultiplier { xi } => {
                Some(xi.iter().flatten().map(Mat::op_norm).fold(0.0, f64::max))
            }
            PerfectKind::Paraproduct { rho } | PerfectKind::ParaproductAdjoint { rho } => {
                Some(paraproduct_l2_bound(rho))
            }
        },
        OperatorSpec::Shift(s) => s.is_normalized().then_some(1.0),
        OperatorSpec::Smooth(_) => None,
    }
}

/// Per-atom quantities from the `H₁ → L₁` argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomBound {
    pub valid: bool,
    pub atom_l1: f64,
    /// `‖T a‖₁`.
    pub total: f64,
    /// `‖T(a) 1_{Q̂}‖₁` with the parent cube standing in for `2Q`.
    pub near: f64,
    pub far: f64,
    /// Hansen step on `a`: left and right side.
    pub hansen: Option<(f64, f64)>,
    /// Hansen step on `T a` over `Q̂`.
    pub near_hansen: Option<(f64, f64)>,
    /// `‖T(a) − T(a)e‖` (row: `‖T(a) − eT(a)‖`).
    pub right_factor: Option<f64>,
    /// `(‖T(a)e‖₁, ‖T a‖₂‖e‖₂)`.
    pub holder: Option<(f64, f64)>,
    /// `(‖T a‖₂, C ‖a‖₂)` with `C` from [`l2_bound`].
    pub l2_chain: Option<(f64, f64)>,
}

fn restrict(f: &MatFn, keep: impl Fn(usize) -> bool) -> MatFn {
    let vals = (0..f.grid().leaves())
        .map(|l| {
            if keep(l) {
                f.at(l).clone()
            } else {
                Mat::zeros(f.dim())
            }
        })
        .collect();
    MatFn::new(f.grid(), f.dim(), vals).expect("sizes consistent")
}

fn one_atom(op: &OperatorSpec, kind: AtomKind, i: usize, ens: &EnsembleSpec) -> Result<AtomBound> {
    let g = ens.grid;
    let mut rng = ens.rng(i);
    let atom = random_atom(kind, g, ens.d, &mut rng)?;
    let check = verify_atom(&atom);
    let side = if kind.is_column() {
        Side::Column
    } else {
        Side::Row
    };
    let op = op.with_side(side);
    let ta = op.apply(&atom.a)?;
    let total = l1_norm(&ta);
    let mut out = AtomBound {
        valid: check.valid,
        atom_l1: check.l1,
        total,
        near: total,
        far: 0.0,
        hansen: None,
        near_hansen: None,
        right_factor: None,
        holder: None,
        l2_chain: None,
    };
    if let Some(q) = atom.cube {
        let parent = q.parent();
        let near_fn = restrict(&ta, |l| {
            g.ancestor_of_leaf(l, parent.gen) == parent.flat(g.n)
        });
        let far_fn = ta.sub(&near_fn);
        out.near = l1_norm(&near_fn);
        out.far = l1_norm(&far_fn);
        out.hansen = Some(hansen_sides(&atom.a, &q, kind.is_column()));
        out.near_hansen = Some(hansen_sides(&near_fn, &parent, kind.is_column()));
    }
    if let (Some(_), Some(e)) = (atom.k0, &atom.e) {
        let te = if kind.is_column() {
            ta.mul(e)
        } else {
            e.mul(&ta)
        };
        let e2 = phi_trace(e).re.sqrt();
        out.right_factor = Some(ta.max_dist(&te));
        out.holder = Some((l1_norm(&te), l2_norm(&ta) * e2));
    }
    if let Some(c) = l2_bound(&op) {
        out.l2_chain = Some((l2_norm(&ta), c * l2_norm(&atom.a)));
    }
    Ok(out)
}

const CHAIN_TOL: f64 = 1e-10;

fn ratio_max(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    max_of(pairs.map(|(l, r)| {
        if r > 0.0 {
            l / r
        } else if l <= 1e-14 {
            0.0
        } else {
            f64::INFINITY
        }
    }))
}

/// Applies `op` (on the atom's side) to random atoms and records each step of
/// the atomic `H₁ → L₁` argument.
pub fn atom_operator_bound(
    op: &OperatorSpec,
    kind: AtomKind,
    ens: &EnsembleSpec,
) -> Result<(ProbeReport, Vec<AtomBound>)> {
    ens.validate()?;
    let rows: Vec<AtomBound> = (0..ens.samples)
        .into_par_iter()
        .map(|i| one_atom(op, kind, i, ens))
        .collect::<Result<_>>()?;
    let name = format!("atom_bounds.{}", kind.name());
    let mut rep = ProbeReport::new(&name);
    let invalid = rows.iter().filter(|r| !r.valid).count();
    rep.push(CheckRecord::at_most(
        "atoms_valid",
        "atoms.valid",
        invalid as f64,
        0.0,
    ));
    rep.push(CheckRecord::measured(
        "max_total",
        "atoms.total",
        max_of(rows.iter().map(|r| r.total)),
    ));
    rep.push(CheckRecord::measured(
        "max_near",
        "atoms.near",
        max_of(rows.iter().map(|r| r.near)),
    ));
    rep.push(CheckRecord::measured(
        "max_far",
        "atoms.far",
        max_of(rows.iter().map(|r| r.far)),
    ));
    if matches!(kind, AtomKind::MeiColumn | AtomKind::MeiRow) {
        rep.push(CheckRecord::at_most(
            "atom_l1",
            "atoms.mei_l1",
            max_of(rows.iter().map(|r| r.atom_l1)),
            1.0 + CHAIN_TOL,
        ));
        rep.push(CheckRecord::at_most(
            "hansen",
            "atoms.hansen",
            ratio_max(rows.iter().filter_map(|r| r.hansen)),
            1.0 + CHAIN_TOL,
        ));
        rep.push(CheckRecord::at_most(
            "near_hansen",
            "atoms.near_hansen",
            ratio_max(rows.iter().filter_map(|r| r.near_hansen)),
            1.0 + CHAIN_TOL,
        ));
        if let OperatorSpec::Perfect(_) = op {
            rep.push(CheckRecord::at_most(
                "perfect_far_vanishes",
                "atoms.perfect_far",
                max_of(rows.iter().map(|r| r.far)),
                CHAIN_TOL,
            ));
        }
    }
    if matches!(kind, AtomKind::PerrinC | AtomKind::PerrinR) {
        let rf = max_of(rows.iter().filter_map(|r| r.right_factor));
        if matches!(op, OperatorSpec::Transform(_) | OperatorSpec::Perfect(_)) {
            rep.push(CheckRecord::at_most(
                "e_factor",
                "atoms.perrin_factor",
                rf,
                CHAIN_TOL,
            ));
        } else {
            rep.push(CheckRecord::measured("e_factor", "atoms.perrin_factor", rf));
        }
        rep.push(CheckRecord::at_most(
            "holder",
            "atoms.perrin_holder",
            ratio_max(rows.iter().filter_map(|r| r.holder)),
            1.0 + CHAIN_TOL,
        ));
    }
    if rows.iter().any(|r| r.l2_chain.is_some()) {
        rep.push(CheckRecord::at_most(
            "l2_chain",
            "atoms.l2_chain",
            ratio_max(rows.iter().filter_map(|r| r.l2_chain)),
            1.0 + CHAIN_TOL,
        ));
    }
    rep.push_series("total", rows.iter().map(|r| r.total).collect());
    Ok((rep, rows))
}

/// Per-sample quantities for the paraproduct `L_∞ → BMO` step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParaproductBmoSample {
    /// `‖Π_ρ^c f‖_{BMO_r}` and `‖ρ‖_{BMO_r}‖f‖_∞`.
    pub col: (f64, f64),
    /// `‖Π_ρ^r f‖_{BMO_c}` and `‖ρ‖_{BMO_c}‖f‖_∞`.
    pub row: (f64, f64),
    /// `‖Π f − Σ_j (ρ − ρ_j)Δ_j f − (ρ − ρ_0) f_0‖`.
    pub telescope: f64,
    /// `‖Σ_{j ≥ 1} (ρ − ρ_j)Δ_j f‖₁ / (bmo(ρ)·h1d(f))`.
    pub h1d_ratio: f64,
}

pub fn paraproduct_bmo_sample(rho: &MatFn, f: &MatFn) -> Result<ParaproductBmoSample> {
    let pc = TransformSpec::paraproduct(rho.clone(), Side::Column).apply(f)?;
    let pr = TransformSpec::paraproduct(rho.clone(), Side::Row).apply(f)?;
    let brho = bmo_norms(rho);
    let finf = linf_norm(f);
    let rhos = expectations(rho);
    let dfs = differences(f);
    let mut tail = MatFn::zeros(f.grid(), f.dim());
    for j in 1..dfs.len() {
        tail.add_assign(&rho.sub(&rhos[j]).mul(&dfs[j]));
    }
    let head = rho.sub(&rhos[0]).mul(&expect(f, 0)?);
    let h1d = hardy_norms(f, &[])?.h1_diag.expect("set");
    let bmo = brho.bmo_cond().expect("set");
    Ok(ParaproductBmoSample {
        col: (
            bmo_norms(&pc).bmo_row.expect("set"),
            brho.bmo_row.expect("set") * finf,
        ),
        row: (
            bmo_norms(&pr).bmo_col.expect("set"),
            brho.bmo_col.expect("set") * finf,
        ),
        telescope: pc.max_dist(&tail.add(&head)),
        h1d_ratio: if bmo * h1d > 0.0 {
            l1_norm(&tail) / (bmo * h1d)
        } else {
            0.0
        },
    })
}

/// `‖Π_ρ^c f‖_{BMO_r} ≤ ‖ρ‖_{BMO_r}‖f‖_∞` (and its row mirror) over random `f`.
pub fn paraproduct_bmo_estimate(
    rho: &MatFn,
    ens: &EnsembleSpec,
) -> Result<(ProbeReport, Vec<ParaproductBmoSample>)> {
    ens.validate()?;
    let rows: Vec<ParaproductBmoSample> = (0..ens.samples)
        .into_par_iter()
        .map(|i| {
            let f = random_fn(&mut ens.rng(i), ens.grid, ens.d);
            paraproduct_bmo_sample(rho, &f)
        })
        .collect::<Result<_>>()?;
    let mut rep = ProbeReport::new("paraproduct_bmo");
    rep.push(CheckRecord::at_most(
        "col_bmo_r",
        "paraproduct.bmo_r",
        ratio_max(rows.iter().map(|r| r.col)),
        1.0 + CHAIN_TOL,
    ));
    rep.push(CheckRecord::at_most(
        "row_bmo_c",
        "paraproduct.bmo_c",
        ratio_max(rows.iter().map(|r| r.row)),
        1.0 + CHAIN_TOL,
    ));
    rep.push(CheckRecord::at_most(
        "telescope",
        "paraproduct.telescope",
        max_of(rows.iter().map(|r| r.telescope)),
        1e-10,
    ));
    rep.push(CheckRecord::measured(
        "h1d_ratio",
        "paraproduct.h1d",
        max_of(rows.iter().map(|r| r.h1d_ratio)),
    ));
    rep.push_series("h1d_ratio", rows.iter().map(|r| r.h1d_ratio).collect());
    Ok((rep, rows))
}

/// Sampled `sup_k sup_β max(‖β(f − f_k)‖₁, ‖(f − f_k)β‖₁)` over rank-one
/// `β = 1_Q uv*` with `‖β‖₁ = 1`, `Q` of generation `k < K`.
///
/// Each term is at most `bmo(f)` by Cauchy–Schwarz, so the returned value is
/// a lower bound for the John–Nirenberg quantity and at most `bmo(f)`.
pub fn john_nirenberg_lower<R: Rng + ?Sized>(f: &MatFn, samples: usize, rng: &mut R) -> f64 {
    let g = f.grid();
    let d = f.dim();
    let es = expectations(f);
    let w = g.leaf_measure();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let k = rng.random_range(0..g.depth);
        let c = rng.random_range(0..g.cubes_at(k));
        let u = gaussian_vec(rng, d);
        let v = gaussian_vec(rng, d);
        let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // ‖1_Q uv*‖₁ = |Q| |u||v| / d
        let scale = d as f64 / (g.measure_at(k) * norm(&u) * norm(&v));
        let beta = Mat::outer(&u, &v).scale(scale);
        let (mut left, mut right) = (0.0, 0.0);
        for l in g.leaves_of(k, c) {
            let x = f.at(l) - es[k as usize].at(l);
            left += w * (&beta * &x).ntrace_norm();
            right += w * (&x * &beta).ntrace_norm();
        }
        best = best.max(left).max(right);
    }
    best
}
