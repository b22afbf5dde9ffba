use serde::{Deserialize, Serialize};

use crate::dyadic::{differences, expect, expectations, Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::Mat;

/// Which side the kernel or coefficient multiplies on.
///
/// Column: `T f(x) = ∫ k(x,y) f(y) dy`. Row: `T f(x) = ∫ f(y) k(x,y) dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Column,
}

impl Side {
    pub fn mul(self, coef: &Mat, x: &Mat) -> Mat {
        match self {
            Side::Column => coef * x,
            Side::Row => x * coef,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Row => Side::Column,
            Side::Column => Side::Row,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Row => "row",
            Side::Column => "column",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "row" => Some(Side::Row),
            "column" => Some(Side::Column),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TransformKind {
    /// `M_ξ f = Σ_k ξ_{k−1} df_k`; `xi[k][cube]` for `k = 0..K−1`.
    Transform { xi: Vec<Vec<Mat>> },
    /// `Π_ρ f = Σ_k Δ_k(ρ) E_{k−1} f`.
    Paraproduct { rho: MatFn },
    /// `Σ_k E_{k−1}(Δ_k(ρ)* Δ_k g)`, the adjoint of the column paraproduct.
    ParaproductAdjoint { rho: MatFn },
}

/// Martingale transform or paraproduct with matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec {
    pub grid: Grid,
    pub d: usize,
    pub kind: TransformKind,
    pub side: Side,
}

pub(crate) fn check_levels(grid: Grid, d: usize, xi: &[Vec<Mat>]) -> Result<()> {
    if xi.len() != grid.depth as usize {
        return Err(Error::Mismatch(format!(
            "need ξ_0..ξ_{}, got {} levels",
            grid.depth - 1,
            xi.len()
        )));
    }
    for (k, level) in xi.iter().enumerate() {
        if level.len() != grid.cubes_at(k as u32) {
            return Err(Error::Mismatch(format!(
                "ξ_{k} has {} cubes, expected {}",
                level.len(),
                grid.cubes_at(k as u32)
            )));
        }
        if let Some(m) = level.iter().find(|m| m.dim() != d) {
            return Err(Error::Mismatch(format!("ξ_{k} entry of size {}", m.dim())));
        }
    }
    Ok(())
}

/// `Σ_k ξ_{k−1} df_k` (column) or `Σ_k df_k ξ_{k−1}` (row).
pub(crate) fn transform_path(xi: &[Vec<Mat>], side: Side, f: &MatFn) -> MatFn {
    let g = f.grid();
    let dfs = differences(f);
    let mut out = MatFn::zeros(g, f.dim());
    for k in 1..=g.depth {
        let coef = MatFn::from_level(g, f.dim(), k - 1, &xi[k as usize - 1]);
        out.add_assign(&dfs[k as usize].zip_map(&coef, |x, c| side.mul(c, x)));
    }
    out
}

/// `Σ_k Δ_k(ρ) E_{k−1} f` (column) or `Σ_k E_{k−1} f Δ_k(ρ)` (row).
pub(crate) fn paraproduct_path(rho: &MatFn, side: Side, f: &MatFn) -> MatFn {
    let g = f.grid();
    let drho = differences(rho);
    let ef = expectations(f);
    let mut out = MatFn::zeros(g, f.dim());
    for k in 1..=g.depth as usize {
        out.add_assign(&ef[k - 1].zip_map(&drho[k], |x, c| side.mul(c, x)));
    }
    out
}

/// `Σ_k E_{k−1}(Δ_k(ρ)* Δ_k g)` (column) or `Σ_k E_{k−1}(Δ_k g Δ_k(ρ)*)` (row).
pub(crate) fn paraproduct_adjoint_path(rho: &MatFn, side: Side, g: &MatFn) -> MatFn {
    let grid = g.grid();
    let drho = differences(rho);
    let dg = differences(g);
    let mut out = MatFn::zeros(grid, g.dim());
    for k in 1..=grid.depth {
        let prod = dg[k as usize].zip_map(&drho[k as usize], |x, c| side.mul(&c.adjoint(), x));
        out.add_assign(&expect(&prod, k - 1).expect("generation in range"));
    }
    out
}

/// Largest leaf deviation of `x` from its generation-`k` average.
pub fn adaptedness_deviation(x: &MatFn, k: u32) -> Result<f64> {
    Ok(x.max_dist(&expect(x, k)?))
}

const TOL_ADAPTED: f64 = 1e-12;

impl TransformSpec {
    /// From per-generation functions `ξ_0..ξ_{K−1}`; each must be constant on
    /// its generation's cubes.
    pub fn transform(xi: &[MatFn], side: Side) -> Result<Self> {
        let first = xi
            .first()
            .ok_or(Error::Empty("transform needs ξ_0..ξ_{K−1}"))?;
        let grid = first.grid();
        let d = first.dim();
        if xi.len() != grid.depth as usize {
            return Err(Error::Mismatch(format!(
                "need {} coefficients, got {}",
                grid.depth,
                xi.len()
            )));
        }
        let mut levels = Vec::with_capacity(xi.len());
        for (k, x) in xi.iter().enumerate() {
            x.check_compatible(first)?;
            let dev = adaptedness_deviation(x, k as u32)?;
            if dev > TOL_ADAPTED * x.max_frob().max(1.0) {
                return Err(Error::NonAdapted {
                    k: k as u32,
                    deviation: dev,
                });
            }
            levels.push(x.level_values(k as u32)?);
        }
        Ok(TransformSpec {
            grid,
            d,
            kind: TransformKind::Transform { xi: levels },
            side,
        })
    }

    pub fn from_levels(grid: Grid, d: usize, xi: Vec<Vec<Mat>>, side: Side) -> Result<Self> {
        check_levels(grid, d, &xi)?;
        Ok(TransformSpec {
            grid,
            d,
            kind: TransformKind::Transform { xi },
            side,
        })
    }

    pub fn paraproduct(rho: MatFn, side: Side) -> Self {
        TransformSpec {
            grid: rho.grid(),
            d: rho.dim(),
            kind: TransformKind::Paraproduct { rho },
            side,
        }
    }

    pub fn paraproduct_adjoint(rho: MatFn, side: Side) -> Self {
        TransformSpec {
            grid: rho.grid(),
            d: rho.dim(),
            kind: TransformKind::ParaproductAdjoint { rho },
            side,
        }
    }

    pub fn apply(&self, f: &MatFn) -> Result<MatFn> {
        f.check_compatible_grid(self.grid)?;
        if f.dim() != self.d {
            return Err(Error::Mismatch(format!("d = {} vs {}", f.dim(), self.d)));
        }
        Ok(match &self.kind {
            TransformKind::Transform { xi } => transform_path(xi, self.side, f),
            TransformKind::Paraproduct { rho } => paraproduct_path(rho, self.side, f),
            TransformKind::ParaproductAdjoint { rho } => {
                paraproduct_adjoint_path(rho, self.side, f)
            }
        })
    }

    /// Adjoint under `⟨f, g⟩ = φ(f* g)`.
    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            TransformKind::Transform { xi } => TransformKind::Transform {
                xi: xi
                    .iter()
                    .map(|l| l.iter().map(Mat::adjoint).collect())
                    .collect(),
            },
            TransformKind::Paraproduct { rho } => {
                TransformKind::ParaproductAdjoint { rho: rho.clone() }
            }
            TransformKind::ParaproductAdjoint { rho } => {
                TransformKind::Paraproduct { rho: rho.clone() }
            }
        };
        TransformSpec {
            kind,
            ..self.clone()
        }
    }

    /// Same operator acting on `f*`, returning `(T f)*`: coefficients
    /// conjugated and side swapped.
    pub fn conjugate_side(&self) -> Self {
        let kind = match &self.kind {
            TransformKind::Transform { xi } => TransformKind::Transform {
                xi: xi
                    .iter()
                    .map(|l| l.iter().map(Mat::adjoint).collect())
                    .collect(),
            },
            TransformKind::Paraproduct { rho } => TransformKind::Paraproduct { rho: rho.adjoint() },
            TransformKind::ParaproductAdjoint { rho } => {
                TransformKind::ParaproductAdjoint { rho: rho.adjoint() }
            }
        };
        TransformSpec {
            kind,
            side: self.side.flip(),
            ..self.clone()
        }
    }

    /// `sup_k ‖ξ_k‖_∞` for transforms, `None` otherwise.
    pub fn sup_coefficient(&self) -> Option<f64> {
        match &self.kind {
            TransformKind::Transform { xi } => {
                Some(xi.iter().flatten().map(Mat::op_norm).fold(0.0, f64::max))
            }
            _ => None,
        }
    }
}

/// `M_ξ f`.
pub fn martingale_transform(spec: &TransformSpec, f: &MatFn) -> Result<MatFn> {
    match spec.kind {
        TransformKind::Transform { .. } => spec.apply(f),
        _ => Err(Error::Invalid("spec is not a martingale transform".into())),
    }
}

/// `Π_ρ f`.
pub fn mart_paraproduct(spec: &TransformSpec, f: &MatFn) -> Result<MatFn> {
    match spec.kind {
        TransformKind::Paraproduct { .. } => spec.apply(f),
        _ => Err(Error::Invalid("spec is not a paraproduct".into())),
    }
}

/// `[Π_ρ]* g` for a paraproduct spec.
pub fn paraproduct_adjoint(spec: &TransformSpec, g: &MatFn) -> Result<MatFn> {
    match spec.kind {
        TransformKind::Paraproduct { .. } => spec.adjoint().apply(g),
        _ => Err(Error::Invalid("spec is not a paraproduct".into())),
    }
}
