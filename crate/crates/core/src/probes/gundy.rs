use serde::Serialize;

use crate::cuculescu::{cuculescu_run, CuculescuSeq};
use crate::dyadic::{expect, l1_norm, l2_norm, mart_diff, phi_trace, MatFn};
use crate::error::Result;
use crate::ncalg::{clean_projection, jacobi_eigen, proj_join, Mat, ProjMatrix, C64};

/// `df_k = dα_k + dβ_k + dγ_k` for `k = 1..=K`; index 0 holds zeros.
#[derive(Clone, Debug)]
pub struct GundyParts {
    pub seq: CuculescuSeq,
    pub d_alpha: Vec<MatFn>,
    pub d_beta: Vec<MatFn>,
    pub d_gamma: Vec<MatFn>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GundyReport {
    pub lambda: f64,
    pub f_l1: f64,
    /// `max_k ‖dα_k + dβ_k + dγ_k − df_k‖`.
    pub sum_residual: f64,
    /// `‖α‖₂² / (λ ‖f‖₁)`.
    pub alpha_ratio: f64,
    /// `Σ_k ‖dβ_k‖₁ / ‖f‖₁`.
    pub beta_ratio: f64,
    /// `λ φ(⋁_k supp* dγ_k) / ‖f‖₁`.
    pub gamma_ratio: f64,
    /// `max ‖q dγ_k q‖` with `q = 1 − supp* dγ_k`.
    pub supp_residual: f64,
}

pub fn gundy_decompose(f: &MatFn, lambda: f64) -> Result<GundyParts> {
    let seq = cuculescu_run(f, lambda)?;
    let g = f.grid();
    let d = f.dim();
    let mut d_alpha = vec![MatFn::zeros(g, d)];
    let mut d_beta = vec![MatFn::zeros(g, d)];
    let mut d_gamma = vec![MatFn::zeros(g, d)];
    for k in 1..=g.depth {
        let df = mart_diff(f, k)?;
        let qk = seq.q_fn(k as i64);
        let qprev = seq.q_fn(k as i64 - 1);
        let inner = df.sandwich(&qk);
        let cond = expect(&inner, k - 1)?;
        let outer = df.sandwich(&qprev);
        d_alpha.push(inner.sub(&cond));
        d_beta.push(outer.sub(&inner).add(&cond));
        d_gamma.push(df.sub(&outer));
    }
    Ok(GundyParts {
        seq,
        d_alpha,
        d_beta,
        d_gamma,
    })
}

/// Support threshold for singular values, relative to `scale`.
const SUPP_TOL: f64 = 1e-11;

/// `supp* a`: join of the left and right supports of `a`.
///
/// Read off the dilation `[[0, a], [a*, 0]]`, whose eigenvalues are `±σ` with
/// absolute accuracy, rather than from `a a*` where small `σ` drown.
pub fn two_sided_support(a: &Mat, scale: f64) -> ProjMatrix {
    let d = a.dim();
    let adj = a.adjoint();
    let h = Mat::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, false) => a.get(i, j - d),
        (false, true) => adj.get(i - d, j),
        _ => C64::new(0.0, 0.0),
    });
    let e = jacobi_eigen(&h.hermitian_part());
    let thr = SUPP_TOL * scale.max(1.0);
    let w: Vec<f64> = e
        .values
        .iter()
        .map(|v| (v.abs() > thr) as u8 as f64)
        .collect();
    let p = e.assemble(&w);
    let left = clean_projection(&Mat::from_fn(d, |i, j| p.get(i, j)));
    let right = clean_projection(&Mat::from_fn(d, |i, j| p.get(i + d, j + d)));
    proj_join(&[&left, &right]).expect("two inputs")
}

impl GundyParts {
    pub fn alpha(&self) -> MatFn {
        sum_all(&self.d_alpha)
    }

    pub fn beta(&self) -> MatFn {
        sum_all(&self.d_beta)
    }

    pub fn gamma(&self) -> MatFn {
        sum_all(&self.d_gamma)
    }

    pub fn report(&self, f: &MatFn) -> Result<GundyReport> {
        let g = f.grid();
        let d = f.dim();
        let lambda = self.seq.lambda;
        let f_l1 = l1_norm(f);
        let scale = crate::dyadic::linf_norm(f);
        let mut sum_residual = 0.0f64;
        for k in 1..=g.depth {
            let df = mart_diff(f, k)?;
            let s = self.d_alpha[k as usize]
                .add(&self.d_beta[k as usize])
                .add(&self.d_gamma[k as usize]);
            sum_residual = sum_residual.max(s.max_dist(&df));
        }
        let beta_l1: f64 = self.d_beta[1..].iter().map(l1_norm).sum();

        let mut supp_residual = 0.0f64;
        let mut joined = Vec::with_capacity(g.leaves());
        for l in 0..g.leaves() {
            let mut acc = ProjMatrix::zero(d);
            for dg in &self.d_gamma[1..] {
                let a = dg.at(l);
                let s = two_sided_support(a, scale);
                let q = s.complement();
                supp_residual = supp_residual.max(a.sandwich(&q).op_norm());
                acc = proj_join(&[&acc, &s])?;
            }
            joined.push(acc.into_inner());
        }
        let supp = MatFn::new(g, d, joined)?;
        let supp_trace = phi_trace(&supp).re;
        let ratio = |x: f64| if f_l1 > 0.0 { x / f_l1 } else { 0.0 };
        Ok(GundyReport {
            lambda,
            f_l1,
            sum_residual,
            alpha_ratio: ratio(l2_norm(&self.alpha()).powi(2) / lambda),
            beta_ratio: ratio(beta_l1),
            gamma_ratio: ratio(lambda * supp_trace),
            supp_residual,
        })
    }
}

fn sum_all(parts: &[MatFn]) -> MatFn {
    let mut acc = MatFn::zeros(parts[0].grid(), parts[0].dim());
    for p in parts {
        acc.add_assign(p);
    }
    acc
}
