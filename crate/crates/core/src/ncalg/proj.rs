use std::ops::Deref;

use super::eig::{jacobi_eigen, SpectralDecomp};
use super::mat::Mat;
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance.
pub const TOL_HERM: f64 = 1e-10;
/// Idempotence tolerance for projections.
pub const TOL_PROJ: f64 = 1e-8;
/// Relative width of the endpoint band in spectral intervals.
pub const TOL_BAND: f64 = 1e-9;
/// Eigenvalue threshold below 1 used by [`proj_meet`].
pub const TOL_MEET: f64 = 1e-8;
/// Relative tolerance of the ordering test [`proj_leq`].
pub const TOL_ORDER: f64 = 1e-8;

/// A matrix validated as Hermitian. Stored as its exact Hermitian part.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix(Mat);

impl HermMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        let tol = TOL_HERM * m.frobenius().max(1.0);
        let deviation = m.herm_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(HermMatrix(m.hermitian_part()))
    }

    /// Takes the Hermitian part without checking.
    pub fn symmetrize(m: &Mat) -> Self {
        HermMatrix(m.hermitian_part())
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

impl Deref for HermMatrix {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

/// A matrix validated as an orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjMatrix(Mat);

impl ProjMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        let h = HermMatrix::new(m).map_err(|e| match e {
            Error::NotHermitian { deviation, .. } => Error::NotProjection { deviation },
            other => other,
        })?;
        let deviation = (&(&*h * &*h) - &*h).op_norm();
        if deviation > TOL_PROJ {
            return Err(Error::NotProjection { deviation });
        }
        Ok(ProjMatrix(h.into_inner()))
    }

    pub fn zero(d: usize) -> Self {
        ProjMatrix(Mat::zeros(d))
    }

    pub fn identity(d: usize) -> Self {
        ProjMatrix(Mat::identity(d))
    }

    /// 1 − P.
    pub fn complement(&self) -> Self {
        ProjMatrix(&Mat::identity(self.0.dim()) - &self.0)
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.0.trace().re.round().max(0.0) as usize
    }

    pub fn is_zero(&self) -> bool {
        self.0.max_abs() <= TOL_PROJ
    }

    pub fn is_identity(&self) -> bool {
        (&Mat::identity(self.0.dim()) - &self.0).max_abs() <= TOL_PROJ
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

impl Deref for ProjMatrix {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

pub fn herm_eig(a: &HermMatrix) -> SpectralDecomp {
    jacobi_eigen(a)
}

/// `U φ(Λ) U*`. Fails if φ is non-finite at some eigenvalue.
pub fn func_calc(a: &HermMatrix, phi: impl Fn(f64) -> f64) -> Result<HermMatrix> {
    let e = jacobi_eigen(a);
    let mut w = Vec::with_capacity(e.dim());
    for &lam in &e.values {
        let v = phi(lam);
        if !v.is_finite() {
            return Err(Error::FunctionUndefined { eigenvalue: lam });
        }
        w.push(v);
    }
    Ok(HermMatrix::symmetrize(&e.assemble(&w)))
}

/// |A| = (A*A)^{1/2} for an arbitrary square matrix.
pub fn abs(a: &Mat) -> HermMatrix {
    let gram = HermMatrix::symmetrize(&(&a.adjoint() * a));
    func_calc(&gram, |x| x.max(0.0).sqrt()).expect("sqrt is finite on a PSD spectrum")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Open(f64),
    Closed(f64),
    Unbounded,
}

/// A real interval with open, closed or infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    /// (lo, hi]
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo: Endpoint::Open(lo),
            hi: Endpoint::Closed(hi),
        }
    }

    /// (λ, ∞)
    pub fn above(lam: f64) -> Self {
        Interval {
            lo: Endpoint::Open(lam),
            hi: Endpoint::Unbounded,
        }
    }

    /// (−∞, λ]
    pub fn at_most(lam: f64) -> Self {
        Interval {
            lo: Endpoint::Unbounded,
            hi: Endpoint::Closed(lam),
        }
    }

    /// [λ, ∞)
    pub fn at_least(lam: f64) -> Self {
        Interval {
            lo: Endpoint::Closed(lam),
            hi: Endpoint::Unbounded,
        }
    }

    /// Membership with a band of half-width `band`: closed ends are widened,
    /// open ends narrowed, so complementary intervals still partition ℝ.
    pub fn contains(&self, x: f64, band: f64) -> bool {
        let lo_ok = match self.lo {
            Endpoint::Open(a) => x > a + band,
            Endpoint::Closed(a) => x >= a - band,
            Endpoint::Unbounded => true,
        };
        let hi_ok = match self.hi {
            Endpoint::Open(b) => x < b - band,
            Endpoint::Closed(b) => x <= b + band,
            Endpoint::Unbounded => true,
        };
        lo_ok && hi_ok
    }
}

/// Spectral projection of `a` onto the eigenvalues inside `iv`.
pub fn spectral_proj(a: &HermMatrix, iv: Interval) -> ProjMatrix {
    let e = jacobi_eigen(a);
    proj_from_decomp(&e, iv)
}

fn proj_from_decomp(e: &SpectralDecomp, iv: Interval) -> ProjMatrix {
    let band = TOL_BAND * e.spectral_radius();
    let w: Vec<f64> = e
        .values
        .iter()
        .map(|&v| if iv.contains(v, band) { 1.0 } else { 0.0 })
        .collect();
    ProjMatrix(HermMatrix::symmetrize(&e.assemble(&w)).into_inner())
}

/// Nearest projection to an almost-projection: eigenvalues above ½ become 1.
pub fn clean_projection(m: &Mat) -> ProjMatrix {
    spectral_proj(&HermMatrix::symmetrize(m), Interval::above(0.5))
}

/// Projection onto the intersection of the ranges.
pub fn proj_meet(ps: &[&ProjMatrix]) -> Result<ProjMatrix> {
    let first = ps
        .first()
        .ok_or(Error::Empty("proj_meet needs at least one projection"))?;
    let d = first.dim();
    let active: Vec<&&ProjMatrix> = ps.iter().filter(|p| !p.is_identity()).collect();
    if active.iter().any(|p| p.is_zero()) {
        return Ok(ProjMatrix::zero(d));
    }
    match active.len() {
        0 => Ok(ProjMatrix::identity(d)),
        1 => Ok((**active[0]).clone()),
        m => {
            let mut sum = Mat::zeros(d);
            for p in &active {
                sum += &p.0;
            }
            let avg = HermMatrix::symmetrize(&sum.scale(1.0 / m as f64));
            let e = jacobi_eigen(&avg);
            let w: Vec<f64> = e
                .values
                .iter()
                .map(|&v| if v >= 1.0 - TOL_MEET { 1.0 } else { 0.0 })
                .collect();
            Ok(ProjMatrix(
                HermMatrix::symmetrize(&e.assemble(&w)).into_inner(),
            ))
        }
    }
}

/// Projection onto the closed span of the ranges, `1 − ⋀(1 − P_i)`.
pub fn proj_join(ps: &[&ProjMatrix]) -> Result<ProjMatrix> {
    if ps.is_empty() {
        return Err(Error::Empty("proj_join needs at least one projection"));
    }
    let comps: Vec<ProjMatrix> = ps.iter().map(|p| p.complement()).collect();
    let refs: Vec<&ProjMatrix> = comps.iter().collect();
    Ok(proj_meet(&refs)?.complement())
}

/// A ≤ B for a projection `b`, tested as ‖A − BAB‖ ≤ tol·max(1, ‖A‖).
pub fn proj_leq(a: &Mat, b: &Mat) -> bool {
    leq_deviation(a, b) <= TOL_ORDER * a.op_norm().max(1.0)
}

/// ‖A − BAB‖.
pub fn leq_deviation(a: &Mat, b: &Mat) -> f64 {
    (a - &b.sandwich(a)).op_norm()
}

/// Matrix inequality A ≤ B for Hermitian A, B: min eigenvalue of B − A.
pub fn min_eig_gap(a: &Mat, b: &Mat) -> f64 {
    let diff = HermMatrix::symmetrize(&(b - a));
    jacobi_eigen(&diff).values.first().copied().unwrap_or(0.0)
}
