use super::matfn::{MatFn, CZERO};
use crate::error::{Error, Result};
use crate::ncalg::{jacobi_eigen, HermMatrix, Mat, C64};

/// `φ(f) = ∫ tr f(x) dx` with the normalized trace.
pub fn phi_trace(f: &MatFn) -> C64 {
    let w = f.grid().leaf_measure();
    f.values().iter().map(|m| m.ntrace()).sum::<C64>() * w
}

/// `φ(f* g)`.
pub fn inner(f: &MatFn, g: &MatFn) -> C64 {
    let w = f.grid().leaf_measure();
    let d = f.dim() as f64;
    let mut s = CZERO;
    for (a, b) in f.values().iter().zip(g.values()) {
        // tr(a* b) = Σ conj(a_ij) b_ij
        for (x, y) in a.entries().iter().zip(b.entries()) {
            s += x.conj() * y;
        }
    }
    s * (w / d)
}

/// `E_k f`.
pub fn expect(f: &MatFn, k: u32) -> Result<MatFn> {
    if k == f.grid().depth {
        return Ok(f.clone());
    }
    let lv = f.level_values(k)?;
    Ok(MatFn::from_level(f.grid(), f.dim(), k, &lv).with_flag(f.is_hermitian_flagged()))
}

/// `df_k = E_k f − E_{k−1} f`, `1 ≤ k ≤ K`.
pub fn mart_diff(f: &MatFn, k: u32) -> Result<MatFn> {
    f.check_gen(k, 1)?;
    Ok(expect(f, k)?.sub(&expect(f, k - 1)?))
}

/// All of `E_0 f, …, E_K f`.
pub fn expectations(f: &MatFn) -> Vec<MatFn> {
    (0..=f.grid().depth)
        .map(|k| expect(f, k).expect("generation in range"))
        .collect()
}

/// `[0, df_1, …, df_K]`; index 0 is a zero placeholder.
pub fn differences(f: &MatFn) -> Vec<MatFn> {
    let e = expectations(f);
    let mut out = vec![MatFn::zeros(f.grid(), f.dim())];
    for k in 1..e.len() {
        out.push(e[k].sub(&e[k - 1]));
    }
    out
}

fn singular_values(m: &Mat) -> Vec<f64> {
    m.singular_values()
}

/// `(φ|f|^p)^{1/p}`; `p = ∞` gives the largest leaf operator norm.
pub fn lp_norm(f: &MatFn, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Invalid(format!("L_p exponent must be ≥ 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.values().iter().map(Mat::op_norm).fold(0.0, f64::max));
    }
    let w = f.grid().leaf_measure() / f.dim() as f64;
    let s: f64 = f
        .values()
        .iter()
        .map(|m| singular_values(m).iter().map(|s| s.powf(p)).sum::<f64>())
        .sum();
    Ok((s * w).powf(1.0 / p))
}

pub fn l1_norm(f: &MatFn) -> f64 {
    lp_norm(f, 1.0).expect("p = 1")
}

/// `‖f‖₂`, computed from Frobenius norms.
pub fn l2_norm(f: &MatFn) -> f64 {
    let w = f.grid().leaf_measure() / f.dim() as f64;
    (f.values()
        .iter()
        .map(|m| m.frobenius().powi(2))
        .sum::<f64>()
        * w)
        .sqrt()
}

pub fn linf_norm(f: &MatFn) -> f64 {
    lp_norm(f, f64::INFINITY).expect("p = ∞")
}

/// `λ·φ(χ_{(λ,∞)}(|f|))`.
pub fn weak_l1_tail(f: &MatFn, lam: f64) -> Result<f64> {
    if !(lam > 0.0) {
        return Err(Error::Invalid(format!("λ must be positive, got {lam}")));
    }
    let w = f.grid().leaf_measure() / f.dim() as f64;
    let count: usize = f
        .values()
        .iter()
        .map(|m| singular_values(m).iter().filter(|&&s| s > lam).count())
        .sum();
    Ok(lam * count as f64 * w)
}

/// `sup_λ λ φ{|f| > λ}`, attained just below a singular value.
pub fn weak_l1_norm(f: &MatFn) -> f64 {
    let w = f.grid().leaf_measure() / f.dim() as f64;
    let mut sv: Vec<f64> = f
        .values()
        .iter()
        .flat_map(|m| singular_values(m))
        .filter(|&s| s > 0.0)
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    // with s_1 ≥ s_2 ≥ …, the sup is max_i s_i·i·w (λ ↑ s_i)
    sv.iter()
        .enumerate()
        .map(|(i, &s)| s * (i + 1) as f64 * w)
        .fold(0.0, f64::max)
}

/// `‖(∫ f* f)^{1/2}‖`.
pub fn linf_l2c_norm(f: &MatFn) -> f64 {
    gram_norm(f, true)
}

/// `‖(∫ f f*)^{1/2}‖`.
pub fn linf_l2r_norm(f: &MatFn) -> f64 {
    gram_norm(f, false)
}

fn gram_norm(f: &MatFn, column: bool) -> f64 {
    let d = f.dim();
    let mut acc = Mat::zeros(d);
    for m in f.values() {
        let g = if column {
            &m.adjoint() * m
        } else {
            m * &m.adjoint()
        };
        acc += &g;
    }
    let acc = HermMatrix::symmetrize(&acc.scale(f.grid().leaf_measure()));
    jacobi_eigen(&acc)
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;

    #[test]
    fn scalar_indicator_tail() {
        let g = Grid::new(1, 2, 0).unwrap();
        let f = MatFn::scalar(g, 1, &[3.0, 0.0, 0.0, 0.0]);
        assert!((weak_l1_tail(&f, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(weak_l1_tail(&f, 4.0).unwrap(), 0.0);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn support_trace() {
        let g = Grid::new(2, 3, 2).unwrap();
        let s: Vec<f64> = (0..g.leaves())
            .map(|l| if g.in_support(l) { 5.0 } else { 0.0 })
            .collect();
        let f = MatFn::scalar(g, 2, &s);
        assert!((phi_trace(&f).re - 5.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn haar_root_differences() {
        let g = Grid::new(1, 3, 0).unwrap();
        let s: Vec<f64> = (0..8).map(|l| if l < 4 { 1.0 } else { -1.0 }).collect();
        let f = MatFn::scalar(g, 1, &s);
        assert!(mart_diff(&f, 1).unwrap().max_dist(&f) < 1e-15);
        for k in 2..=3 {
            assert!(mart_diff(&f, k).unwrap().max_frob() < 1e-15);
        }
        assert!(mart_diff(&f, 0).is_err());
        assert!(mart_diff(&f, 4).is_err());
    }
}
