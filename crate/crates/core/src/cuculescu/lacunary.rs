use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seq::{cuculescu_run, CuculescuSeq, ProjLevelFamily};
use crate::dyadic::{differences, expect, l1_norm, linf_norm, Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::{clean_projection, leq_deviation, proj_join, proj_meet, Mat, ProjMatrix};

/// Lacunary projections `M_{j,k} = ⋀_{j ≤ s ≤ s_max} q_k(2^s)`.
///
/// `π_{j,k} = M_{j,k} − M_{j−1,k}` for `s_min < j ≤ s_max`, and
/// `ψ_k = M_{s_min,k}`.
#[derive(Clone, Debug)]
pub struct LacunaryFamily {
    pub s_min: i32,
    pub s_max: i32,
    pub grid: Grid,
    pub d: usize,
    /// Cuculescu sequences at `λ = 2^s`, indexed by `s − s_min`.
    pub seqs: Vec<CuculescuSeq>,
    /// `meets[k][j − s_min][cube]`.
    pub meets: Vec<Vec<Vec<Mat>>>,
    pub f_linf: f64,
    pub f_l1: f64,
}

/// Smallest `s_max` with `2^{s_max} ≥ ‖f‖_∞`.
pub fn required_s_max(f_linf: f64) -> i32 {
    if f_linf <= 0.0 {
        i32::MIN / 2
    } else {
        f_linf.log2().ceil() as i32
    }
}

pub fn lacunary_build(f: &MatFn, s_min: i32, s_max: i32) -> Result<LacunaryFamily> {
    if s_min >= s_max {
        return Err(Error::Invalid(format!(
            "lacunary range needs s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    if s_max - s_min > 64 || s_min < -200 || s_max > 200 {
        return Err(Error::Invalid(format!(
            "lacunary range [{s_min}, {s_max}] is too wide"
        )));
    }
    let f_linf = linf_norm(f);
    let required = required_s_max(f_linf);
    if (s_max as f64).exp2() < f_linf {
        return Err(Error::LacunaryRange { s_max, required });
    }
    f.check_positive()?;
    let grid = f.grid();
    let d = f.dim();
    let seqs: Vec<CuculescuSeq> = (s_min..=s_max)
        .into_par_iter()
        .map(|s| cuculescu_run(f, (s as f64).exp2()))
        .collect::<Result<_>>()?;

    let width = (s_max - s_min + 1) as usize;
    let mut meets = Vec::with_capacity(grid.depth as usize + 1);
    for k in 0..=grid.depth {
        let nc = grid.cubes_at(k);
        let mut per_j: Vec<Vec<Mat>> = vec![Vec::new(); width];
        for c in 0..nc {
            // M_{s_max} = q_k(2^{s_max}); M_j = M_{j+1} ∧ q_k(2^j)
            let mut cur = ProjMatrix::new(seqs[width - 1].q.levels[k as usize][c].clone())?;
            per_j[width - 1].push((*cur).clone());
            for ji in (0..width - 1).rev() {
                let qj = ProjMatrix::new(seqs[ji].q.levels[k as usize][c].clone())?;
                cur = proj_meet(&[&qj, &cur])?;
                per_j[ji].push((*cur).clone());
            }
        }
        meets.push(per_j);
    }
    Ok(LacunaryFamily {
        s_min,
        s_max,
        grid,
        d,
        seqs,
        meets,
        f_linf,
        f_l1: l1_norm(f),
    })
}

impl LacunaryFamily {
    fn idx(&self, j: i32) -> usize {
        debug_assert!(j >= self.s_min && j <= self.s_max);
        (j - self.s_min) as usize
    }

    /// `M_{j,k}` on the generation-`k` cube `c`.
    pub fn meet_at(&self, k: u32, j: i32, c: usize) -> &Mat {
        &self.meets[k as usize][self.idx(j)][c]
    }

    /// `π_{j,k}` on cube `c`, `s_min < j ≤ s_max`.
    pub fn pi_at(&self, k: u32, j: i32, c: usize) -> Mat {
        self.meet_at(k, j, c) - self.meet_at(k, j - 1, c)
    }

    pub fn psi_at(&self, k: u32, c: usize) -> &Mat {
        self.meet_at(k, self.s_min, c)
    }

    /// The range of `j` indexing `π`.
    pub fn pi_range(&self) -> std::ops::RangeInclusive<i32> {
        self.s_min + 1..=self.s_max
    }

    pub fn meet_fn(&self, k: u32, j: i32) -> MatFn {
        MatFn::from_level(self.grid, self.d, k, &self.meets[k as usize][self.idx(j)])
            .with_flag(true)
    }

    pub fn pi_fn(&self, k: u32, j: i32) -> MatFn {
        self.meet_fn(k, j).sub(&self.meet_fn(k, j - 1))
    }

    pub fn psi_fn(&self, k: u32) -> MatFn {
        self.meet_fn(k, self.s_min)
    }

    /// Cuculescu sequence at `λ = 2^s`.
    pub fn seq(&self, s: i32) -> &CuculescuSeq {
        &self.seqs[self.idx(s)]
    }

    pub fn check(&self, f: &MatFn) -> Result<LacunaryCheck> {
        lacunary_check(f, self)
    }
}

/// Structural checks on a [`LacunaryFamily`].
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct LacunaryCheck {
    /// `max ‖π² − π‖`.
    pub pi_idempotent: f64,
    /// `max ‖π_i π_j‖`, `i ≠ j`.
    pub pi_orthogonal: f64,
    /// `max ‖Σ π + ψ − 1‖`.
    pub partition: f64,
    /// `max_k ‖ψ_k df_k‖_∞`.
    pub psi_df: f64,
    /// `2^{1 + s_min/2} ‖f‖_∞^{1/2}`.
    pub psi_df_bound: f64,
    /// `max ‖q̂_{k−1} π_{i,k−1}‖, ‖π_{i,k−1} q̂_{k−1}‖` over `i > ℓ` and all `ℓ`.
    pub key_identity_qhat: f64,
    /// `max ‖π_{i,k−1} p_{k−s}‖, ‖p_{k−s} π_{i,k−1}‖` over `i ≤ ℓ`, `s ≥ 1`.
    pub key_identity_p: f64,
    /// `M_{j,k} ≤ M_{j+1,k}` deviation.
    pub nesting_j: f64,
    /// `M_{j,k+1} ≤ M_{j,k}` deviation.
    pub nesting_k: f64,
}

fn lacunary_check(f: &MatFn, fam: &LacunaryFamily) -> Result<LacunaryCheck> {
    f.check_compatible_grid(fam.grid)?;
    let g = fam.grid;
    let d = fam.d;
    let id = Mat::identity(d);
    let mut out = LacunaryCheck {
        psi_df_bound: (1.0 + fam.s_min as f64 / 2.0).exp2() * fam.f_linf.sqrt(),
        ..Default::default()
    };
    for k in 0..=g.depth {
        for c in 0..g.cubes_at(k) {
            let pis: Vec<Mat> = fam.pi_range().map(|j| fam.pi_at(k, j, c)).collect();
            let mut sum = fam.psi_at(k, c).clone();
            for (a, pa) in pis.iter().enumerate() {
                out.pi_idempotent = out.pi_idempotent.max((&(pa * pa) - pa).op_norm());
                for (b, pb) in pis.iter().enumerate() {
                    if a != b {
                        out.pi_orthogonal = out.pi_orthogonal.max((pa * pb).op_norm());
                    }
                }
                sum += pa;
            }
            out.partition = out.partition.max((&sum - &id).op_norm());
            for j in fam.s_min..fam.s_max {
                let dev = leq_deviation(fam.meet_at(k, j, c), fam.meet_at(k, j + 1, c));
                out.nesting_j = out.nesting_j.max(dev);
            }
            if k >= 1 {
                let parent = g.cube(k, c).parent().flat(g.n);
                for j in fam.s_min..=fam.s_max {
                    let dev = leq_deviation(fam.meet_at(k, j, c), fam.meet_at(k - 1, j, parent));
                    out.nesting_k = out.nesting_k.max(dev);
                }
            }
        }
    }

    // ψ_k df_k per generation-k cube
    let fl: Vec<Vec<Mat>> = (0..=g.depth)
        .map(|k| f.level_values(k))
        .collect::<Result<_>>()?;
    for k in 1..=g.depth {
        for c in 0..g.cubes_at(k) {
            let parent = g.cube(k, c).parent().flat(g.n);
            let df = &fl[k as usize][c] - &fl[k as usize - 1][parent];
            let v = (fam.psi_at(k, c) * &df).op_norm();
            out.psi_df = out.psi_df.max(v);
        }
    }

    // key identities for every admissible ℓ, evaluated on generation-(k−1) cubes
    for ell in fam.s_min + 1..=fam.s_max {
        let seq = fam.seq(ell);
        for k in 1..=g.depth {
            let km1 = k - 1;
            for c in 0..g.cubes_at(km1) {
                let qh = fam.meet_at(km1, ell, c);
                let cube = g.cube(km1, c);
                for i in fam.pi_range() {
                    let pi = fam.pi_at(km1, i, c);
                    if i > ell {
                        out.key_identity_qhat = out
                            .key_identity_qhat
                            .max((qh * &pi).op_norm())
                            .max((&pi * qh).op_norm());
                    } else {
                        for s in 1..=k {
                            let m = k - s;
                            let anc = cube.ancestor(km1 - m);
                            let p = p_at(seq, m, anc.flat(g.n));
                            out.key_identity_p = out
                                .key_identity_p
                                .max((&pi * &p).op_norm())
                                .max((&p * &pi).op_norm());
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `p_m` of a Cuculescu sequence on a generation-`m` cube.
pub(crate) fn p_at(seq: &CuculescuSeq, m: u32, c: usize) -> Mat {
    let g = seq.grid();
    let q = &seq.q.levels[m as usize][c];
    if m == 0 {
        &Mat::identity(seq.dim()) - q
    } else {
        let parent = g.cube(m, c).parent().flat(g.n);
        &seq.q.levels[m as usize - 1][parent] - q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriPart {
    Upper,
    Lower,
}

/// `UT_k(x) = Σ_{i ≤ j} π_{i,k} x π_{j,k}` or `LT_k(x) = Σ_{i > j} π_{i,k} x π_{j,k}`.
pub fn triangular_truncate(
    x: &MatFn,
    fam: &LacunaryFamily,
    k: u32,
    part: TriPart,
) -> Result<MatFn> {
    x.check_compatible_grid(fam.grid)?;
    if x.dim() != fam.d {
        return Err(Error::Mismatch(format!(
            "matrix size {} vs family size {}",
            x.dim(),
            fam.d
        )));
    }
    if k > fam.grid.depth {
        return Err(Error::OutOfRange {
            what: "generation",
            value: k as i64,
            range: format!("[0, {}]", fam.grid.depth),
        });
    }
    let g = fam.grid;
    let top = fam.s_max;
    let vals = (0..g.leaves())
        .map(|l| {
            let c = g.ancestor_of_leaf(l, k);
            let xv = x.at(l);
            let psi = fam.psi_at(k, c);
            let mtop = fam.meet_at(k, top, c);
            let mut acc = Mat::zeros(fam.d);
            for j in fam.pi_range() {
                let pj = fam.pi_at(k, j, c);
                let left = match part {
                    // Σ_{s_min < i ≤ j} π_i = M_j − ψ
                    TriPart::Upper => fam.meet_at(k, j, c) - psi,
                    // Σ_{j < i ≤ s_max} π_i = M_{s_max} − M_j
                    TriPart::Lower => mtop - fam.meet_at(k, j, c),
                };
                acc += &(&(&left * xv) * &pj);
            }
            acc
        })
        .collect();
    MatFn::new(g, fam.d, vals)
}

/// `f = f_r + f_c + Ψ` with the canonical truncated series.
#[derive(Clone, Debug)]
pub struct RowColSplit {
    pub f_r: MatFn,
    pub f_c: MatFn,
    pub residual: MatFn,
    pub residual_linf: f64,
    pub residual_l1: f64,
    /// `‖E_0 f‖_∞ + 2K(1 + 2^{n/2}) 2^{s_min/2} ‖f‖_∞^{1/2}`.
    pub residual_bound: f64,
}

pub fn row_col_split(f: &MatFn, s_min: i32, s_max: i32) -> Result<(LacunaryFamily, RowColSplit)> {
    let fam = lacunary_build(f, s_min, s_max)?;
    let split = row_col_split_with(f, &fam)?;
    Ok((fam, split))
}

pub fn row_col_split_with(f: &MatFn, fam: &LacunaryFamily) -> Result<RowColSplit> {
    let g = f.grid();
    let d = f.dim();
    let dfs = differences(f);
    let mut f_r = MatFn::zeros(g, d);
    let mut f_c = MatFn::zeros(g, d);
    for k in 1..=g.depth {
        f_c.add_assign(&triangular_truncate(
            &dfs[k as usize],
            fam,
            k - 1,
            TriPart::Upper,
        )?);
        f_r.add_assign(&triangular_truncate(
            &dfs[k as usize],
            fam,
            k - 1,
            TriPart::Lower,
        )?);
    }
    let residual = f.sub(&f_r).sub(&f_c);
    let f0 = expect(f, 0)?;
    let residual_bound = linf_norm(&f0)
        + 2.0
            * g.depth as f64
            * (1.0 + (g.n as f64 / 2.0).exp2())
            * (fam.s_min as f64 / 2.0).exp2()
            * fam.f_linf.sqrt();
    Ok(RowColSplit {
        residual_linf: linf_norm(&residual),
        residual_l1: l1_norm(&residual),
        f_r,
        f_c,
        residual,
        residual_bound,
    })
}

/// `q̂_k = ⋀_{ℓ ≤ s ≤ s_max} q_k(2^s)` for `k = 0..=K`.
#[derive(Clone, Debug)]
pub struct QHat {
    pub ell: i32,
    pub levels: ProjLevelFamily,
}

pub fn qhat_build(fam: &LacunaryFamily, ell: i32) -> Result<QHat> {
    if ell <= fam.s_min || ell > fam.s_max {
        return Err(Error::OutOfRange {
            what: "ℓ",
            value: ell as i64,
            range: format!("({}, {}]", fam.s_min, fam.s_max),
        });
    }
    let levels = (0..=fam.grid.depth)
        .map(|k| fam.meets[k as usize][fam.idx(ell)].clone())
        .collect();
    Ok(QHat {
        ell,
        levels: ProjLevelFamily {
            grid: fam.grid,
            d: fam.d,
            levels,
        },
    })
}

impl QHat {
    pub fn lambda(&self) -> f64 {
        (self.ell as f64).exp2()
    }

    /// `q̂_k` as a leaf function; `k = −1` gives the identity.
    pub fn q_fn(&self, k: i64) -> MatFn {
        if k < 0 {
            MatFn::constant(self.levels.grid, &Mat::identity(self.levels.d))
        } else {
            self.levels.lift(k as u32)
        }
    }

    /// `q̂ = q̂_K`.
    pub fn q_final(&self) -> MatFn {
        self.levels.lift(self.levels.depth())
    }

    /// `p̂_k = q̂_{k−1} − q̂_k`.
    pub fn p_fn(&self, k: u32) -> MatFn {
        self.q_fn(k as i64 - 1).sub(&self.q_fn(k as i64))
    }

    /// `φ(1 − q̂)`.
    pub fn defect(&self) -> f64 {
        let g = self.levels.grid;
        self.levels.levels[g.depth as usize]
            .iter()
            .map(|m| 1.0 - m.ntrace().re)
            .sum::<f64>()
            / g.leaves() as f64
    }

    /// Largest `‖q̂ − q̂_k q̂ q̂_k‖`, i.e. the failure of `q̂ ≤ q̂_k`.
    pub fn below_levels_deviation(&self) -> f64 {
        let g = self.levels.grid;
        let mut worst = 0.0f64;
        for l in 0..g.leaves() {
            let q = self.levels.at_leaf(g.depth, l);
            for k in 0..=g.depth {
                worst = worst.max(leq_deviation(q, self.levels.at_leaf(k, l)));
            }
        }
        worst
    }
}

/// Output of the dilation construction.
#[derive(Clone, Debug)]
pub struct Zeta {
    pub s: u32,
    /// `rho[j][cube]` from `q̂_{j−1} − q̂_j` on generation-`j` cubes.
    pub rho: Vec<Vec<Mat>>,
    /// `ζ = ζ_K`.
    pub zeta: MatFn,
    grid: Grid,
    d: usize,
}

pub fn zeta_build(qhat: &QHat, s: u32) -> Result<Zeta> {
    let g = qhat.levels.grid;
    let d = qhat.levels.d;
    let mut rho = Vec::with_capacity(g.depth as usize + 1);
    for j in 0..=g.depth {
        let mut level = Vec::with_capacity(g.cubes_at(j));
        for c in 0..g.cubes_at(j) {
            let prev = if j == 0 {
                Mat::identity(d)
            } else {
                let parent = g.cube(j, c).parent().flat(g.n);
                qhat.levels.levels[j as usize - 1][parent].clone()
            };
            let diff = &prev - &qhat.levels.levels[j as usize][c];
            level.push(clean_projection(&diff).into_inner());
        }
        rho.push(level);
    }
    let mut z = Zeta {
        s,
        rho,
        zeta: MatFn::zeros(g, d),
        grid: g,
        d,
    };
    z.zeta = z.zeta_k(g.depth)?;
    Ok(z)
}

impl Zeta {
    /// `ζ_k(x) = 1 − ⋁ {ρ_Q : gen Q ≤ k, x ∈ Q̂^s}`.
    pub fn zeta_k(&self, k: u32) -> Result<MatFn> {
        let g = self.grid;
        let d = self.d;
        let mut vals = Vec::with_capacity(g.leaves());
        for l in 0..g.leaves() {
            let mut active: Vec<ProjMatrix> = Vec::new();
            for j in 0..=k {
                let a = j.saturating_sub(self.s);
                let anc = g.cube(a, g.ancestor_of_leaf(l, a));
                // all generation-j cubes inside the generation-a cube at x
                for c in descendants(&g, anc, j) {
                    let r = &self.rho[j as usize][c];
                    if r.max_abs() > 1e-12 {
                        active.push(ProjMatrix::new(r.clone())?);
                    }
                }
            }
            let joined = if active.is_empty() {
                ProjMatrix::zero(d)
            } else {
                let refs: Vec<&ProjMatrix> = active.iter().collect();
                proj_join(&refs)?
            };
            vals.push((*joined.complement()).clone());
        }
        Ok(MatFn::new(g, d, vals)?.with_flag(true))
    }

    /// `φ(1 − ζ)`.
    pub fn defect(&self) -> f64 {
        1.0 - crate::dyadic::phi_trace(&self.zeta).re
    }

    /// Largest failure of `ζ(x) ≤ q̂_{k₀}(y)` for `x ∈ Q̂₀^s`, `y ∈ Q₀`.
    pub fn dominance_deviation(&self, qhat: &QHat) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for k0 in 0..=g.depth {
            let a = k0.saturating_sub(self.s);
            for c in 0..g.cubes_at(k0) {
                let qh = &qhat.levels.levels[k0 as usize][c];
                let anc = g.cube(k0, c).ancestor(self.s);
                debug_assert_eq!(anc.gen, a);
                for l in g.leaves_of(a, anc.flat(g.n)) {
                    worst = worst.max(leq_deviation(self.zeta.at(l), qh));
                }
            }
        }
        worst
    }

    /// Largest `‖ρ_{Q₁} ρ_{Q₂}‖` over strictly nested `Q₁ ⊊ Q₂`.
    pub fn nested_rho_overlap(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for j1 in 1..=g.depth {
            for c in 0..g.cubes_at(j1) {
                let r1 = &self.rho[j1 as usize][c];
                let cube = g.cube(j1, c);
                for up in 1..=j1 {
                    let anc = cube.ancestor(up);
                    let r2 = &self.rho[anc.gen as usize][anc.flat(g.n)];
                    worst = worst.max((r1 * r2).op_norm());
                }
            }
        }
        worst
    }
}

/// Flat indices of the generation-`j` cubes inside `cube` (`j ≥ cube.gen`).
fn descendants(g: &Grid, cube: crate::dyadic::CubeIndex, j: u32) -> Vec<usize> {
    let shift = j - cube.gen;
    let w = 1u32 << shift;
    let x0 = cube.coords[0] << shift;
    if g.n == 1 {
        (x0..x0 + w).map(|x| x as usize).collect()
    } else {
        let x1 = cube.coords[1] << shift;
        let mut out = Vec::with_capacity((w * w) as usize);
        for a in x0..x0 + w {
            for b in x1..x1 + w {
                out.push(((a as usize) << j) | b as usize);
            }
        }
        out
    }
}
