use serde::Serialize;

use crate::dyadic::{differences, expect, expectations, l1_norm, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::{jacobi_eigen, Mat};

/// Hardy and BMO functionals of one function. Unset entries were not requested.
///
/// The square functions run over `df_1, …, df_K`, so the root part `E_0 f`
/// never enters the `H`/`h` norms. `bmo_r`/`bmo_c` include `‖E_0 f‖₁`, the
/// root algebra standing in for the first one.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NormReport {
    #[serde(rename = "H1r", skip_serializing_if = "Option::is_none")]
    pub h1_row: Option<f64>,
    #[serde(rename = "H1c", skip_serializing_if = "Option::is_none")]
    pub h1_col: Option<f64>,
    #[serde(rename = "h1r", skip_serializing_if = "Option::is_none")]
    pub h1_row_cond: Option<f64>,
    #[serde(rename = "h1c", skip_serializing_if = "Option::is_none")]
    pub h1_col_cond: Option<f64>,
    #[serde(rename = "h1d", skip_serializing_if = "Option::is_none")]
    pub h1_diag: Option<f64>,
    /// `(p, H_p^r, H_p^c)`.
    #[serde(rename = "Hp", skip_serializing_if = "Vec::is_empty")]
    pub hp: Vec<(f64, f64, f64)>,
    #[serde(rename = "BMOr", skip_serializing_if = "Option::is_none")]
    pub bmo_row: Option<f64>,
    #[serde(rename = "BMOc", skip_serializing_if = "Option::is_none")]
    pub bmo_col: Option<f64>,
    #[serde(rename = "bmor", skip_serializing_if = "Option::is_none")]
    pub bmo_row_cond: Option<f64>,
    #[serde(rename = "bmoc", skip_serializing_if = "Option::is_none")]
    pub bmo_col_cond: Option<f64>,
    #[serde(rename = "bmod", skip_serializing_if = "Option::is_none")]
    pub bmo_diag: Option<f64>,
}

impl NormReport {
    /// `max(BMOr, BMOc)`.
    pub fn bmo(&self) -> Option<f64> {
        Some(self.bmo_row?.max(self.bmo_col?))
    }

    /// `max(bmor, bmoc, bmod)`.
    pub fn bmo_cond(&self) -> Option<f64> {
        Some(
            self.bmo_row_cond?
                .max(self.bmo_col_cond?)
                .max(self.bmo_diag?),
        )
    }

    /// Field-wise merge; entries set in `other` win.
    pub fn merge(mut self, other: NormReport) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            h1_row,
            h1_col,
            h1_row_cond,
            h1_col_cond,
            h1_diag,
            bmo_row,
            bmo_col,
            bmo_row_cond,
            bmo_col_cond,
            bmo_diag
        );
        if !other.hp.is_empty() {
            self.hp = other.hp;
        }
        self
    }
}

/// `Σ_i max(λ_i, 0)^q` over the eigenvalues of a PSD matrix.
fn power_trace(s: &Mat, q: f64) -> f64 {
    jacobi_eigen(s)
        .values
        .iter()
        .map(|l| l.max(0.0).powf(q))
        .sum()
}

/// `‖S^{1/2}‖_p` for a PSD-valued function `S`.
fn sqrt_lp(s: &MatFn, p: f64) -> f64 {
    let w = s.grid().leaf_measure() / s.dim() as f64;
    let t: f64 = s.values().iter().map(|m| power_trace(m, p / 2.0)).sum();
    (t * w).powf(1.0 / p)
}

fn gram(x: &Mat, column: bool) -> Mat {
    if column {
        &x.adjoint() * x
    } else {
        x * &x.adjoint()
    }
}

/// `Σ_k df_k* df_k` (column) or `Σ_k df_k df_k*` (row).
pub fn square_function(f: &MatFn, column: bool) -> MatFn {
    let mut s = MatFn::zeros(f.grid(), f.dim());
    for df in &differences(f)[1..] {
        s.add_assign(&df.map(|m| gram(m, column)));
    }
    s
}

/// `Σ_k E_{k−1}(df_k* df_k)` (column) or with `df_k df_k*` (row).
pub fn conditional_square_function(f: &MatFn, column: bool) -> MatFn {
    let mut s = MatFn::zeros(f.grid(), f.dim());
    for (k, df) in differences(f).iter().enumerate().skip(1) {
        let g = df.map(|m| gram(m, column));
        s.add_assign(&expect(&g, k as u32 - 1).expect("generation in range"));
    }
    s
}

/// `H1r, H1c, h1r, h1c, h1d` and `H_p^{r,c}` for each requested `p ≥ 1`.
pub fn hardy_norms(f: &MatFn, ps: &[f64]) -> Result<NormReport> {
    if let Some(&p) = ps.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
        return Err(Error::Invalid(format!(
            "H_p exponent must be in [1, ∞), got {p}"
        )));
    }
    let sc = square_function(f, true);
    let sr = square_function(f, false);
    let cc = conditional_square_function(f, true);
    let cr = conditional_square_function(f, false);
    Ok(NormReport {
        h1_row: Some(sqrt_lp(&sr, 1.0)),
        h1_col: Some(sqrt_lp(&sc, 1.0)),
        h1_row_cond: Some(sqrt_lp(&cr, 1.0)),
        h1_col_cond: Some(sqrt_lp(&cc, 1.0)),
        h1_diag: Some(differences(f)[1..].iter().map(l1_norm).sum()),
        hp: ps
            .iter()
            .map(|&p| (p, sqrt_lp(&sr, p), sqrt_lp(&sc, p)))
            .collect(),
        ..Default::default()
    })
}

/// `sup_k ‖E_k[(f − f_j)^♯(f − f_j)]‖^{1/2}` with `j = k − shift`, over `k ∈ ks`.
fn conditional_sup(f: &MatFn, column: bool, ks: std::ops::RangeInclusive<u32>, shift: u32) -> f64 {
    let es = expectations(f);
    let mut worst = 0.0f64;
    for k in ks {
        let g = f.sub(&es[(k - shift) as usize]).map(|m| gram(m, column));
        let e = g.level_values(k).expect("generation in range");
        for m in &e {
            worst = worst.max(m.op_norm());
        }
    }
    worst.sqrt()
}

/// `BMO_{r,c}` over `k = 1..K`, `bmo_{r,c}` over `k = 0..K−1` plus `‖E_0 f‖₁`,
/// and `bmo_d = sup_k ‖df_k‖_∞`.
pub fn bmo_norms(f: &MatFn) -> NormReport {
    let kk = f.grid().depth;
    let root = l1_norm(&expect(f, 0).expect("generation 0"));
    let bmod = differences(f)[1..]
        .iter()
        .flat_map(|d| d.values().iter().map(Mat::op_norm).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    NormReport {
        bmo_row: Some(conditional_sup(f, false, 1..=kk, 1)),
        bmo_col: Some(conditional_sup(f, true, 1..=kk, 1)),
        bmo_row_cond: Some(root.max(conditional_sup(f, false, 0..=kk - 1, 0))),
        bmo_col_cond: Some(root.max(conditional_sup(f, true, 0..=kk - 1, 0))),
        bmo_diag: Some(bmod),
        ..Default::default()
    }
}

/// [`hardy_norms`] and [`bmo_norms`] together.
pub fn all_norms(f: &MatFn, ps: &[f64]) -> Result<NormReport> {
    Ok(hardy_norms(f, ps)?.merge(bmo_norms(f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;

    #[test]
    fn constant_has_zero_square_functions() {
        let g = Grid::new(1, 3, 0).unwrap();
        let f = MatFn::constant(g, &Mat::diag(&[1.0, -2.0]));
        let r = all_norms(&f, &[2.0]).unwrap();
        assert!(r.h1_col.unwrap() < 1e-12 && r.bmo_col.unwrap() < 1e-12);
        assert!((r.bmo_col_cond.unwrap() - 1.5).abs() < 1e-12);
    }
}
