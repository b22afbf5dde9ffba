use serde::Serialize;

use super::seq::{cuculescu_run, root_admissible, CuculescuSeq};
use crate::dyadic::{expectations, l1_norm, l2_norm, mart_diff, Grid, MatFn};
use crate::error::Result;

/// The four parts of the CZ decomposition at level `λ`.
#[derive(Clone, Debug)]
pub struct CZParts {
    pub seq: CuculescuSeq,
    pub g_d: MatFn,
    pub b_d: MatFn,
    pub b_off: MatFn,
    pub g_off: MatFn,
}

/// Diagnostics attached to a CZ decomposition.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CZDiagnostics {
    pub lambda: f64,
    pub root_admissible: bool,
    /// `max ‖g_d + b_d + b_off + g_off − f‖`.
    pub sum_residual: f64,
    /// `max ‖g_off − Σ_{k,s} g_{k,s}‖`.
    pub series_residual: f64,
    /// `‖g_d‖₂²`.
    pub g_d_l2_sq: f64,
    /// `2ⁿ λ ‖f‖₁`.
    pub g_d_bound: f64,
    /// `Σ_k ‖p_k (f − f_k) p_k‖₁`.
    pub b_d_l1_sum: f64,
    /// `2 ‖f‖₁`.
    pub b_d_bound: f64,
    pub f_l1: f64,
}

/// `f = g_d + b_d + b_off + g_off` built from [`cuculescu_run`].
pub fn cz_decompose(f: &MatFn, lambda: f64) -> Result<CZParts> {
    let seq = cuculescu_run(f, lambda)?;
    Ok(cz_from_seq(f, seq))
}

pub fn cz_from_seq(f: &MatFn, seq: CuculescuSeq) -> CZParts {
    let grid = f.grid();
    let d = f.dim();
    let kk = grid.depth as usize;
    let fk = expectations(f);
    let ps: Vec<MatFn> = (0..=grid.depth).map(|k| seq.p_fn(k)).collect();
    let q = seq.q_final();
    let one_minus_q = q.one_minus();

    let mut g_d = f.sandwich(&q);
    let mut b_d = MatFn::zeros(grid, d);
    for k in 0..=kk {
        g_d.add_assign(&fk[k].sandwich(&ps[k]));
        b_d.add_assign(&f.sub(&fk[k]).sandwich(&ps[k]));
    }
    let mut b_off = MatFn::zeros(grid, d);
    let mut g_off = q.mul(f).mul(&one_minus_q);
    g_off.add_assign(&one_minus_q.mul(f).mul(&q));
    for i in 0..=kk {
        for j in 0..=kk {
            if i == j {
                continue;
            }
            let m = i.max(j);
            b_off.add_assign(&f.sub(&fk[m]).between(&ps[i], &ps[j]));
            g_off.add_assign(&fk[m].between(&ps[i], &ps[j]));
        }
    }
    CZParts {
        seq,
        g_d: g_d.with_flag(true),
        b_d: b_d.with_flag(true),
        b_off: b_off.with_flag(true),
        g_off: g_off.with_flag(true),
    }
}

impl CZParts {
    pub fn grid(&self) -> Grid {
        self.g_d.grid()
    }

    pub fn sum(&self) -> MatFn {
        let mut s = self.g_d.add(&self.b_d);
        s.add_assign(&self.b_off);
        s.add_assign(&self.g_off);
        s
    }

    /// `g_{k,s} = p_k df_{k+s} q_{k+s−1} + q_{k+s−1} df_{k+s} p_k` for `s ≥ 1`.
    pub fn g_series_term(&self, f: &MatFn, k: u32, s: u32) -> MatFn {
        let m = k + s;
        let df = mart_diff(f, m).expect("k + s within depth");
        let p = self.seq.p_fn(k);
        let q = self.seq.q_fn(m as i64 - 1);
        let mut t = df.between(&p, &q);
        t.add_assign(&df.between(&q, &p));
        t
    }

    /// `Σ_{s ≥ 1} Σ_k g_{k,s}`.
    pub fn g_series(&self, f: &MatFn) -> MatFn {
        let depth = self.grid().depth;
        let mut acc = MatFn::zeros(self.grid(), f.dim());
        for k in 0..depth {
            for s in 1..=depth - k {
                acc.add_assign(&self.g_series_term(f, k, s));
            }
        }
        acc
    }

    pub fn diagnostics(&self, f: &MatFn) -> CZDiagnostics {
        let grid = f.grid();
        let fk = expectations(f);
        let f_l1 = l1_norm(f);
        let lambda = self.seq.lambda;
        let mut b_d_l1_sum = 0.0;
        for k in 0..=grid.depth {
            let p = self.seq.p_fn(k);
            b_d_l1_sum += l1_norm(&f.sub(&fk[k as usize]).sandwich(&p));
        }
        CZDiagnostics {
            lambda,
            root_admissible: root_admissible(f, lambda),
            sum_residual: self.sum().max_dist(f),
            series_residual: self.g_series(f).max_dist(&self.g_off),
            g_d_l2_sq: l2_norm(&self.g_d).powi(2),
            g_d_bound: (grid.n as f64).exp2() * lambda * f_l1,
            b_d_l1_sum,
            b_d_bound: 2.0 * f_l1,
            f_l1,
        }
    }
}

/// Largest deviations in the martingale-difference identities.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct DeltaReport {
    /// `Δ_k(b_d)` vs `Σ_{j ≤ k−1} p_j df_k p_j`.
    pub b_d_formula: f64,
    /// `Δ_k(g_off)` vs `(1−q_{k−1}) df_k q_{k−1} + q_{k−1} df_k (1−q_{k−1})`.
    pub g_off_formula: f64,
    /// `max ‖q_{k−1} Δ_k(γ) q_{k−1}‖` for `γ = b_d, g_off, b_off`.
    pub compression: [f64; 3],
}

impl DeltaReport {
    pub fn max(&self) -> f64 {
        self.compression
            .iter()
            .fold(self.b_d_formula.max(self.g_off_formula), |a, &b| a.max(b))
    }
}

pub fn delta_formulas_check(f: &MatFn, parts: &CZParts) -> DeltaReport {
    let grid = f.grid();
    let d = f.dim();
    let mut out = DeltaReport::default();
    let ps: Vec<MatFn> = (0..=grid.depth).map(|k| parts.seq.p_fn(k)).collect();
    for k in 1..=grid.depth {
        let df = mart_diff(f, k).expect("k in range");
        let q = parts.seq.q_fn(k as i64 - 1);
        let omq = q.one_minus();

        let mut expect_bd = MatFn::zeros(grid, d);
        for p in &ps[..k as usize] {
            expect_bd.add_assign(&df.sandwich(p));
        }
        let dbd = mart_diff(&parts.b_d, k).expect("k in range");
        out.b_d_formula = out.b_d_formula.max(dbd.max_dist(&expect_bd));

        let mut expect_go = df.between(&omq, &q);
        expect_go.add_assign(&df.between(&q, &omq));
        let dgo = mart_diff(&parts.g_off, k).expect("k in range");
        out.g_off_formula = out.g_off_formula.max(dgo.max_dist(&expect_go));

        for (i, gamma) in [&parts.b_d, &parts.g_off, &parts.b_off].iter().enumerate() {
            let dg = mart_diff(gamma, k).expect("k in range");
            out.compression[i] = out.compression[i].max(dg.sandwich(&q).max_frob());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::Mat;

    #[test]
    fn trivial_q() {
        let g = Grid::new(1, 3, 0).unwrap();
        let f = MatFn::constant(g, &Mat::scalar(2, 0.5));
        let parts = cz_decompose(&f, 1.0).unwrap();
        assert!(parts.g_d.max_dist(&f) < 1e-15);
        for x in [&parts.b_d, &parts.b_off, &parts.g_off] {
            assert!(x.max_frob() < 1e-15);
        }
        assert_eq!(delta_formulas_check(&f, &parts).max(), 0.0);
    }
}
