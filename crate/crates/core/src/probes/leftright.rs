use serde::Serialize;

use crate::cuculescu::{qhat_build, row_col_split, QHat, RowColSplit};
use crate::dyadic::{expect, l1_norm, l2_norm, MatFn};
use crate::error::Result;

/// Left decomposition of `f_r` and right decomposition of `f_c` along `q̂`.
#[derive(Clone, Debug)]
pub struct LeftRightCZ {
    pub qhat: QHat,
    pub split: RowColSplit,
    pub g_r: MatFn,
    pub b_r: MatFn,
    pub g_c: MatFn,
    pub b_c: MatFn,
    /// `Σ_k (‖p̂_k (f_r − E_k f_r)‖₁ + ‖(f_c − E_k f_c) p̂_k‖₁)`.
    pub bad_l1: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LeftRightReport {
    pub lambda: f64,
    pub f_l1: f64,
    /// `max ‖g_r + b_r − f_r‖`, `max ‖g_c + b_c − f_c‖`.
    pub split_residual: [f64; 2],
    /// `‖g_r‖₂² / (λ‖f‖₁)`.
    pub g_r_ratio: f64,
    pub g_c_ratio: f64,
    /// `bad_l1 / ‖f‖₁`.
    pub bad_ratio: f64,
}

pub fn leftright_cz(f: &MatFn, s_min: i32, s_max: i32, ell: i32) -> Result<LeftRightCZ> {
    let (fam, split) = row_col_split(f, s_min, s_max)?;
    let qhat = qhat_build(&fam, ell)?;
    let g = f.grid();
    let q = qhat.q_final();
    let mut g_r = q.mul(&split.f_r);
    let mut g_c = split.f_c.mul(&q);
    let mut b_r = MatFn::zeros(g, f.dim());
    let mut b_c = MatFn::zeros(g, f.dim());
    let mut bad_l1 = 0.0;
    for k in 0..=g.depth {
        let p = qhat.p_fn(k);
        let er = expect(&split.f_r, k)?;
        let ec = expect(&split.f_c, k)?;
        g_r.add_assign(&p.mul(&er));
        g_c.add_assign(&ec.mul(&p));
        let br = p.mul(&split.f_r.sub(&er));
        let bc = split.f_c.sub(&ec).mul(&p);
        bad_l1 += l1_norm(&br) + l1_norm(&bc);
        b_r.add_assign(&br);
        b_c.add_assign(&bc);
    }
    Ok(LeftRightCZ {
        qhat,
        split,
        g_r,
        b_r,
        g_c,
        b_c,
        bad_l1,
    })
}

impl LeftRightCZ {
    pub fn report(&self, f: &MatFn) -> LeftRightReport {
        let lambda = self.qhat.lambda();
        let f_l1 = l1_norm(f);
        let ratio = |x: f64, den: f64| if den > 0.0 { x / den } else { 0.0 };
        LeftRightReport {
            lambda,
            f_l1,
            split_residual: [
                self.g_r.add(&self.b_r).max_dist(&self.split.f_r),
                self.g_c.add(&self.b_c).max_dist(&self.split.f_c),
            ],
            g_r_ratio: ratio(l2_norm(&self.g_r).powi(2), lambda * f_l1),
            g_c_ratio: ratio(l2_norm(&self.g_c).powi(2), lambda * f_l1),
            bad_ratio: ratio(self.bad_l1, f_l1),
        }
    }
}
