use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{expect, l1_norm, l2_norm, phi_trace, CubeIndex, Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::{func_calc, HermMatrix, Mat};
use crate::probes::{gaussian_mat, random_fn, random_projection, sample_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    MeiColumn,
    MeiRow,
    PerrinC,
    PerrinR,
    /// Root-measurable `a` with `‖a‖₁ ≤ 1`.
    UnitA1,
}

impl AtomKind {
    pub const ALL: [AtomKind; 5] = [
        AtomKind::MeiColumn,
        AtomKind::MeiRow,
        AtomKind::PerrinC,
        AtomKind::PerrinR,
        AtomKind::UnitA1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AtomKind::MeiColumn => "mei_column",
            AtomKind::MeiRow => "mei_row",
            AtomKind::PerrinC => "perrin_c",
            AtomKind::PerrinR => "perrin_r",
            AtomKind::UnitA1 => "unit_A1",
        }
    }

    pub fn parse(s: &str) -> Option<AtomKind> {
        AtomKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Column kinds act through right multiplication by `e`, row kinds through left.
    pub fn is_column(self) -> bool {
        matches!(
            self,
            AtomKind::MeiColumn | AtomKind::PerrinC | AtomKind::UnitA1
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomSpec {
    pub kind: AtomKind,
    pub a: MatFn,
    /// Supporting cube of a Mei atom.
    pub cube: Option<CubeIndex>,
    /// Generation and projection of a Perrin atom.
    pub k0: Option<u32>,
    pub e: Option<MatFn>,
}

/// Recomputed atom conditions. `support` and `mean` should vanish, `norm ≤ norm_bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomCheck {
    pub kind: AtomKind,
    /// Mass outside `Q`, or `‖a − ae‖` (`‖a − ea‖` for rows).
    pub support: f64,
    /// `‖∫_Q a‖` or `max ‖E_{k₀} a‖`.
    pub mean: f64,
    pub norm: f64,
    pub norm_bound: f64,
    pub l1: f64,
    pub valid: bool,
}

const ATOM_TOL: f64 = 1e-10;

fn gram(x: &Mat, column: bool) -> Mat {
    if column {
        &x.adjoint() * x
    } else {
        x * &x.adjoint()
    }
}

/// `τ[(∫_Q |a|²)^{1/2}]` with `|a|² = a*a` (column) or `aa*` (row).
pub fn mei_norm(a: &MatFn, q: &CubeIndex, column: bool) -> f64 {
    let g = a.grid();
    let w = g.leaf_measure();
    let mut acc = Mat::zeros(a.dim());
    for l in g.leaves_of(q.gen, q.flat(g.n)) {
        acc.axpy(w, &gram(a.at(l), column));
    }
    let root = func_calc(&HermMatrix::symmetrize(&acc), |x| x.max(0.0).sqrt())
        .expect("sqrt is finite on a PSD spectrum");
    root.into_inner().ntrace().re
}

/// `(τ∫_Q|a|, √|Q|·τ[(∫_Q|a|²)^{1/2}])`, the two sides of the Hansen step.
pub fn hansen_sides(a: &MatFn, q: &CubeIndex, column: bool) -> (f64, f64) {
    let g = a.grid();
    let w = g.leaf_measure();
    let lhs: f64 = g
        .leaves_of(q.gen, q.flat(g.n))
        .into_iter()
        .map(|l| w * a.at(l).ntrace_norm())
        .sum();
    (lhs, g.measure_at(q.gen).sqrt() * mei_norm(a, q, column))
}

/// Mei atom from raw data `b`: restricted to `Q`, mean removed, scaled so the
/// normalization holds with ratio `fill ∈ (0, 1]`.
pub fn mei_atom(b: &MatFn, q: CubeIndex, column: bool, fill: f64) -> Result<AtomSpec> {
    let g = b.grid();
    if q.gen >= g.depth {
        return Err(Error::Invalid(
            "a Mei atom needs a cube with at least two leaves".into(),
        ));
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::Invalid(format!(
            "fill must be in (0, 1], got {fill}"
        )));
    }
    let leaves = g.leaves_of(q.gen, q.flat(g.n));
    let mut mean = Mat::zeros(b.dim());
    for &l in &leaves {
        mean.axpy(1.0 / leaves.len() as f64, b.at(l));
    }
    let mut vals = vec![Mat::zeros(b.dim()); g.leaves()];
    for &l in &leaves {
        vals[l] = b.at(l) - &mean;
    }
    let raw = MatFn::new(g, b.dim(), vals)?;
    let n = mei_norm(&raw, &q, column);
    if n == 0.0 {
        return Err(Error::Invalid("data is constant on Q".into()));
    }
    let target = fill / g.measure_at(q.gen).sqrt();
    Ok(AtomSpec {
        kind: if column {
            AtomKind::MeiColumn
        } else {
            AtomKind::MeiRow
        },
        a: raw.scale(target / n),
        cube: Some(q),
        k0: None,
        e: None,
    })
}

/// Perrin atom `(b − E_{k₀} b) e` (column) or `e (b − E_{k₀} b)` (row), with
/// `‖a‖₂ = fill · φ(e)^{−1/2}`.
pub fn perrin_atom(b: &MatFn, k0: u32, e: &MatFn, column: bool, fill: f64) -> Result<AtomSpec> {
    let g = b.grid();
    if k0 >= g.depth {
        return Err(Error::OutOfRange {
            what: "k0",
            value: k0 as i64,
            range: format!("[0, {})", g.depth),
        });
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::Invalid(format!(
            "fill must be in (0, 1], got {fill}"
        )));
    }
    e.check_compatible(b)?;
    let dev = e.max_dist(&expect(e, k0)?);
    if dev > ATOM_TOL {
        return Err(Error::NonAdapted {
            k: k0,
            deviation: dev,
        });
    }
    let proj = e.mul(e).max_dist(e).max(e.max_dist(&e.adjoint()));
    if proj > 1e-8 {
        return Err(Error::NotProjection { deviation: proj });
    }
    let phi_e = phi_trace(e).re;
    if phi_e <= ATOM_TOL {
        return Err(Error::Invalid("projection e is zero".into()));
    }
    let centred = b.sub(&expect(b, k0)?);
    let raw = if column {
        centred.mul(e)
    } else {
        e.mul(&centred)
    };
    let n = l2_norm(&raw);
    if n == 0.0 {
        return Err(Error::Invalid(
            "data is E_k0-measurable on the range of e".into(),
        ));
    }
    Ok(AtomSpec {
        kind: if column {
            AtomKind::PerrinC
        } else {
            AtomKind::PerrinR
        },
        a: raw.scale(fill / (n * phi_e.sqrt())),
        cube: None,
        k0: Some(k0),
        e: Some(e.clone().with_flag(true)),
    })
}

/// Random atom of the given kind; deterministic in `seed`.
pub fn make_atom(kind: AtomKind, grid: Grid, d: usize, seed: u64) -> Result<AtomSpec> {
    random_atom(kind, grid, d, &mut sample_rng(seed, 0))
}

pub fn random_atom<R: Rng + ?Sized>(
    kind: AtomKind,
    grid: Grid,
    d: usize,
    rng: &mut R,
) -> Result<AtomSpec> {
    let fill = 0.25 + 0.75 * rng.random::<f64>();
    match kind {
        AtomKind::MeiColumn | AtomKind::MeiRow => {
            let gen = rng.random_range(0..grid.depth);
            let q = grid.cube(gen, rng.random_range(0..grid.cubes_at(gen)));
            let b = random_fn(rng, grid, d);
            mei_atom(&b, q, kind.is_column(), fill)
        }
        AtomKind::PerrinC | AtomKind::PerrinR => {
            let k0 = rng.random_range(0..grid.depth);
            let cubes = grid.cubes_at(k0);
            let mut lv: Vec<Mat> = (0..cubes)
                .map(|_| {
                    let rank = rng.random_range(0..=d);
                    random_projection(rng, d, rank)
                })
                .collect();
            let pick = rng.random_range(0..cubes);
            if lv[pick].ntrace().re < 0.5 / d as f64 {
                lv[pick] = random_projection(rng, d, 1);
            }
            let e = MatFn::from_level(grid, d, k0, &lv);
            let b = random_fn(rng, grid, d);
            perrin_atom(&b, k0, &e, kind.is_column(), fill)
        }
        AtomKind::UnitA1 => {
            let m = gaussian_mat(rng, d);
            let c = MatFn::constant(grid, &m);
            let a = c.scale(fill / l1_norm(&c));
            Ok(AtomSpec {
                kind,
                a,
                cube: None,
                k0: None,
                e: None,
            })
        }
    }
}

pub fn verify_atom(at: &AtomSpec) -> AtomCheck {
    let a = &at.a;
    let g = a.grid();
    let column = at.kind.is_column();
    let (support, mean, norm, norm_bound) = match at.kind {
        AtomKind::MeiColumn | AtomKind::MeiRow => match at.cube {
            Some(q) => {
                let inside = g.leaves_of(q.gen, q.flat(g.n));
                let mut outside = 0.0f64;
                let mut integral = Mat::zeros(a.dim());
                for l in 0..g.leaves() {
                    if inside.binary_search(&l).is_ok() {
                        integral.axpy(g.leaf_measure(), a.at(l));
                    } else {
                        outside = outside.max(a.at(l).frobenius());
                    }
                }
                (
                    outside,
                    integral.frobenius(),
                    mei_norm(a, &q, column),
                    1.0 / g.measure_at(q.gen).sqrt(),
                )
            }
            None => (f64::INFINITY, f64::INFINITY, f64::INFINITY, 0.0),
        },
        AtomKind::PerrinC | AtomKind::PerrinR => match (at.k0, &at.e) {
            (Some(k0), Some(e)) if k0 < g.depth => {
                let ae = if column { a.mul(e) } else { e.mul(a) };
                let m = expect(a, k0).map(|x| x.max_frob()).unwrap_or(f64::INFINITY);
                let phi_e = phi_trace(e).re;
                let adapted = e.max_dist(&expect(e, k0).expect("k0 < K"));
                (
                    a.max_dist(&ae).max(adapted),
                    m,
                    l2_norm(a),
                    if phi_e > 0.0 { phi_e.powf(-0.5) } else { 0.0 },
                )
            }
            _ => (f64::INFINITY, f64::INFINITY, f64::INFINITY, 0.0),
        },
        AtomKind::UnitA1 => (
            a.max_dist(&expect(a, 0).expect("generation 0")),
            0.0,
            l1_norm(a),
            1.0,
        ),
    };
    let scale = 1.0 + norm_bound;
    let valid = support <= ATOM_TOL * scale
        && mean <= ATOM_TOL * scale
        && norm <= norm_bound * (1.0 + ATOM_TOL);
    AtomCheck {
        kind: at.kind,
        support,
        mean,
        norm,
        norm_bound,
        l1: l1_norm(a),
        valid,
    }
}
