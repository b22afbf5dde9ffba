use serde::Serialize;

use super::spec::OperatorSpec;
use super::transform::Side;
use crate::cuculescu::{
    cz_from_seq, lacunary_build, qhat_build, triangular_truncate, zeta_build, LacunaryFamily, QHat,
    TriPart,
};
use crate::dyadic::{mart_diff, MatFn};
use crate::error::{Error, Result};

/// Largest residuals of the vanishing identities behind the weak-type proofs.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct AnnihilationReport {
    pub lambda: f64,
    pub side: &'static str,
    /// All Cuculescu `p_k` vanish, so every `γ` is zero.
    pub q_trivial: bool,
    /// `max ‖γ^c‖` over the three parts; scale reference.
    pub gamma_size: f64,
    /// `max_{k,γ} ‖UT_{k−1}(Δ_k γ) q̂_{k−1}‖` (row: `‖q̂_{k−1} LT_{k−1}(Δ_k γ)‖`).
    pub truncation_qhat: f64,
    /// `max_γ ‖T(γ^c) q̂‖` for perfect dyadic operators, transforms, paraproducts.
    pub operator_qhat: Option<f64>,
    /// Haar shifts: `‖C_γ‖`, `‖A_γ q̂‖`, `‖B_γ ζ‖`.
    pub shift_c: Option<f64>,
    pub shift_a_qhat: Option<f64>,
    pub shift_b_zeta: Option<f64>,
}

impl AnnihilationReport {
    /// Largest residual, excluding `C_γ`.
    pub fn max_residual(&self) -> f64 {
        [
            Some(self.truncation_qhat),
            self.operator_qhat,
            self.shift_a_qhat,
            self.shift_b_zeta,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

/// The operator-independent half of [`annihilation_check`]: the truncated
/// pieces `UT_{k−1}(Δ_k γ)` (row side: `LT`) of `γ ∈ {b_d, g_off, b_off}`.
#[derive(Clone, Debug)]
pub struct AnnihilationInput {
    side: Side,
    qhat: QHat,
    /// `pieces[γ][k − 1]`.
    pieces: Vec<Vec<MatFn>>,
    base: AnnihilationReport,
}

impl AnnihilationInput {
    pub fn new(f: &MatFn, fam: &LacunaryFamily, ell: i32, side: Side) -> Result<Self> {
        f.check_compatible_grid(fam.grid)?;
        if f.dim() != fam.d {
            return Err(Error::Mismatch(format!(
                "family d = {} vs f d = {}",
                fam.d,
                f.dim()
            )));
        }
        let g = f.grid();
        let qhat = qhat_build(fam, ell)?;
        let seq = fam.seq(ell).clone();
        let q_trivial = (0..=g.depth).all(|k| seq.p_fn(k).max_frob() == 0.0);
        let parts = cz_from_seq(f, seq);
        let part = match side {
            Side::Column => TriPart::Upper,
            Side::Row => TriPart::Lower,
        };
        let mut base = AnnihilationReport {
            lambda: qhat.lambda(),
            side: side.name(),
            q_trivial,
            ..Default::default()
        };
        let mut pieces = Vec::with_capacity(3);
        for gamma in [&parts.b_d, &parts.g_off, &parts.b_off] {
            let mut gc = MatFn::zeros(g, f.dim());
            let mut list = Vec::with_capacity(g.depth as usize);
            for k in 1..=g.depth {
                let piece = triangular_truncate(&mart_diff(gamma, k)?, fam, k - 1, part)?;
                let qk = qhat.q_fn(k as i64 - 1);
                base.truncation_qhat = base.truncation_qhat.max(kill(side, &piece, &qk).max_frob());
                gc.add_assign(&piece);
                list.push(piece);
            }
            base.gamma_size = base.gamma_size.max(gc.max_frob());
            pieces.push(list);
        }
        Ok(AnnihilationInput {
            side,
            qhat,
            pieces,
            base,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Measures the operator identities for `op`, which must act on this side.
    pub fn check(&self, op: &OperatorSpec) -> Result<AnnihilationReport> {
        if let OperatorSpec::Smooth(_) = op {
            return Err(Error::Invalid(
                "annihilation identities need a dyadic operator".into(),
            ));
        }
        if op.side() != self.side {
            return Err(Error::Mismatch(format!(
                "operator acts on the {} side, input built for {}",
                op.side().name(),
                self.side.name()
            )));
        }
        let g = self.qhat.levels.grid;
        if op.grid() != g {
            return Err(Error::Mismatch(format!("{:?} vs {:?}", op.grid(), g)));
        }
        let d = self.qhat.levels.d;
        let side = self.side;
        let q_final = self.qhat.q_final();
        let mut rep = self.base.clone();
        match op {
            OperatorSpec::Shift(sh) => {
                let zeta = zeta_build(&self.qhat, sh.s)?.zeta;
                let s = sh.s as i64;
                let (mut c_res, mut a_res, mut b_res) = (0.0f64, 0.0f64, 0.0f64);
                for list in &self.pieces {
                    let mut a = MatFn::zeros(g, d);
                    let mut b = MatFn::zeros(g, d);
                    let mut c = MatFn::zeros(g, d);
                    for (i, piece) in list.iter().enumerate() {
                        let km1 = i as i64; // k − 1
                        a.add_assign(&sh.apply_filtered(piece, |gen| gen as i64 >= km1)?);
                        b.add_assign(&sh.apply_filtered(piece, |gen| {
                            (gen as i64) < km1 && gen as i64 >= km1 - s
                        })?);
                        c.add_assign(&sh.apply_filtered(piece, |gen| (gen as i64) < km1 - s)?);
                    }
                    c_res = c_res.max(c.max_frob());
                    a_res = a_res.max(kill(side, &a, &q_final).max_frob());
                    b_res = b_res.max(kill(side, &b, &zeta).max_frob());
                }
                rep.shift_c = Some(c_res);
                rep.shift_a_qhat = Some(a_res);
                rep.shift_b_zeta = Some(b_res);
            }
            _ => {
                let mut op_res = 0.0f64;
                for list in &self.pieces {
                    let mut gc = MatFn::zeros(g, d);
                    for piece in list {
                        gc.add_assign(piece);
                    }
                    let t = op.apply(&gc)?;
                    op_res = op_res.max(kill(side, &t, &q_final).max_frob());
                }
                rep.operator_qhat = Some(op_res);
            }
        }
        Ok(rep)
    }
}

/// `X q̂` on the column side, `q̂ X` on the row side.
fn kill(side: Side, x: &MatFn, p: &MatFn) -> MatFn {
    match side {
        Side::Column => x.mul(p),
        Side::Row => p.mul(x),
    }
}

/// Builds `γ^c = Σ_k UT_{k−1}(Δ_k γ)` (row side: `LT`) for `γ ∈ {b_d, g_off,
/// b_off}` at `λ = 2^ℓ` and measures every identity that should vanish.
pub fn annihilation_check(
    op: &OperatorSpec,
    f: &MatFn,
    s_min: i32,
    s_max: i32,
    ell: i32,
) -> Result<AnnihilationReport> {
    if let OperatorSpec::Smooth(_) = op {
        return Err(Error::Invalid(
            "annihilation identities need a dyadic operator".into(),
        ));
    }
    f.check_compatible_grid(op.grid())?;
    let fam = lacunary_build(f, s_min, s_max)?;
    AnnihilationInput::new(f, &fam, ell, op.side())?.check(op)
}

/// [`annihilation_check`] with a lacunary family built by the caller.
pub fn annihilation_check_with(
    op: &OperatorSpec,
    f: &MatFn,
    fam: &LacunaryFamily,
    ell: i32,
) -> Result<AnnihilationReport> {
    AnnihilationInput::new(f, fam, ell, op.side())?.check(op)
}
