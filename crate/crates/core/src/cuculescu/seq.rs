use serde::Serialize;

use crate::dyadic::{expect, l1_norm, Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::{
    clean_projection, leq_deviation, min_eig_gap, spectral_proj, HermMatrix, Interval, Mat,
};

/// Cube-indexed matrices for generations `0..=K`; `levels[k][cube]`.
///
/// Houses the Cuculescu projections and everything derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjLevelFamily {
    pub grid: Grid,
    pub d: usize,
    pub levels: Vec<Vec<Mat>>,
}

impl ProjLevelFamily {
    /// Constant identity at every generation.
    pub fn identity(grid: Grid, d: usize) -> Self {
        let levels = (0..=grid.depth)
            .map(|k| vec![Mat::identity(d); grid.cubes_at(k)])
            .collect();
        ProjLevelFamily { grid, d, levels }
    }

    pub fn depth(&self) -> u32 {
        self.grid.depth
    }

    /// Generation-`k` member as a leaf function.
    pub fn lift(&self, k: u32) -> MatFn {
        MatFn::from_level(self.grid, self.d, k, &self.levels[k as usize]).with_flag(true)
    }

    /// Value at the generation-`k` cube containing `leaf`.
    pub fn at_leaf(&self, k: u32, leaf: usize) -> &Mat {
        &self.levels[k as usize][self.grid.ancestor_of_leaf(leaf, k)]
    }

    /// Largest `‖A_k − A_{k−1} A_k A_{k−1}‖` over cubes (decreasing in `k`).
    pub fn decreasing_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..=self.depth() {
            for (c, a) in self.levels[k as usize].iter().enumerate() {
                let parent = self.grid.cube(k, c).parent().flat(self.grid.n);
                let b = &self.levels[k as usize - 1][parent];
                worst = worst.max(leq_deviation(a, b));
            }
        }
        worst
    }
}

/// Cuculescu projections `q_0 ≥ q_1 ≥ … ≥ q_K` at level `λ`, with `q_{−1} = 1`.
#[derive(Clone, Debug)]
pub struct CuculescuSeq {
    pub lambda: f64,
    pub q: ProjLevelFamily,
}

impl CuculescuSeq {
    pub fn grid(&self) -> Grid {
        self.q.grid
    }

    pub fn dim(&self) -> usize {
        self.q.d
    }

    /// `q_k` as a leaf function; `k = −1` gives the identity.
    pub fn q_fn(&self, k: i64) -> MatFn {
        if k < 0 {
            MatFn::constant(self.grid(), &Mat::identity(self.dim()))
        } else {
            self.q.lift(k as u32)
        }
    }

    /// `p_k = q_{k−1} − q_k` for `0 ≤ k ≤ K`.
    pub fn p_fn(&self, k: u32) -> MatFn {
        self.q_fn(k as i64 - 1).sub(&self.q_fn(k as i64))
    }

    /// Terminal projection `q = q_K`.
    pub fn q_final(&self) -> MatFn {
        self.q.lift(self.q.depth())
    }

    /// `φ(1 − q)`.
    pub fn defect(&self) -> f64 {
        let g = self.grid();
        let w = 1.0 / g.cubes_at(g.depth) as f64;
        self.q.levels[g.depth as usize]
            .iter()
            .map(|m| 1.0 - m.ntrace().re)
            .sum::<f64>()
            * w
    }
}

/// Iterates `q_k = q_{k−1} − χ_{(λ,∞)}(q_{k−1} f_k q_{k−1})` from `q_{−1} = 1`.
///
/// Eigenvalues within the band of `λ` stay in `[0, λ]`, and the kernel of
/// `q_{k−1} f_k q_{k−1}` inside the range of `q_{k−1}` is kept.
pub fn cuculescu_run(f: &MatFn, lambda: f64) -> Result<CuculescuSeq> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Invalid(format!("λ must be positive, got {lambda}")));
    }
    f.check_positive()?;
    let grid = f.grid();
    let d = f.dim();
    let mut levels: Vec<Vec<Mat>> = Vec::with_capacity(grid.depth as usize + 1);
    for k in 0..=grid.depth {
        let fk = f.level_values(k)?;
        let mut level = Vec::with_capacity(fk.len());
        for (c, fc) in fk.iter().enumerate() {
            let prev = if k == 0 {
                Mat::identity(d)
            } else {
                let parent = grid.cube(k, c).parent().flat(grid.n);
                levels[k as usize - 1][parent].clone()
            };
            let a = HermMatrix::symmetrize(&prev.sandwich(fc));
            let big = spectral_proj(&a, Interval::above(lambda));
            let q = if big.is_zero() {
                prev
            } else {
                clean_projection(&(&prev - &*big)).into_inner()
            };
            level.push(q);
        }
        levels.push(level);
    }
    Ok(CuculescuSeq {
        lambda,
        q: ProjLevelFamily { grid, d, levels },
    })
}

/// Per-cube checks of the three Cuculescu properties.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct CuculescuCheck {
    /// `max ‖q_k − q_{k−1} q_k q_{k−1}‖`.
    pub decreasing: f64,
    /// `max ‖[q_k, q_{k−1} f_k q_{k−1}]‖`.
    pub commutation: f64,
    /// `min λ_min(λ q_k − q_k f_k q_k)`, should be ≥ −tol.
    pub level_gap: f64,
    /// `max ‖p_i p_j‖` over `i ≠ j`.
    pub p_orthogonality: f64,
    /// `max ‖Σ p_k − (1 − q)‖`.
    pub p_sum: f64,
    /// `λ φ(1 − q)`.
    pub weighted_defect: f64,
    /// `‖f‖₁`.
    pub f_l1: f64,
}

pub fn cuculescu_check(f: &MatFn, seq: &CuculescuSeq) -> CuculescuCheck {
    let grid = f.grid();
    let d = f.dim();
    let mut out = CuculescuCheck {
        level_gap: f64::INFINITY,
        ..Default::default()
    };
    out.decreasing = seq.q.decreasing_deviation();
    for k in 0..=grid.depth {
        let fk = f.level_values(k).expect("generation in range");
        for (c, fc) in fk.iter().enumerate() {
            let q = &seq.q.levels[k as usize][c];
            let prev = if k == 0 {
                Mat::identity(d)
            } else {
                let parent = grid.cube(k, c).parent().flat(grid.n);
                seq.q.levels[k as usize - 1][parent].clone()
            };
            let a = prev.sandwich(fc);
            let comm = (&(q * &a) - &(&a * q)).op_norm();
            out.commutation = out.commutation.max(comm);
            let gap = min_eig_gap(&q.sandwich(fc), &q.scale(seq.lambda));
            out.level_gap = out.level_gap.min(gap);
        }
    }
    let ps: Vec<MatFn> = (0..=grid.depth).map(|k| seq.p_fn(k)).collect();
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            if i != j {
                out.p_orthogonality = out.p_orthogonality.max(ps[i].mul(&ps[j]).max_frob());
            }
        }
    }
    let mut sum = MatFn::zeros(grid, d);
    for p in &ps {
        sum.add_assign(p);
    }
    out.p_sum = sum.max_dist(&seq.q_final().one_minus());
    out.weighted_defect = seq.lambda * seq.defect();
    out.f_l1 = l1_norm(f);
    out
}

/// `λ ≥ ‖E_0 f‖_∞`, in which case `p_0 = 0`.
pub fn root_admissible(f: &MatFn, lambda: f64) -> bool {
    let f0 = expect(f, 0).expect("generation 0");
    f0.at(0).op_norm() <= lambda * (1.0 + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_stopping_example() {
        let g = Grid::new(1, 2, 0).unwrap();
        let f = MatFn::scalar(g, 1, &[4.0, 0.0, 0.0, 0.0]);
        let seq = cuculescu_run(&f, 1.0).unwrap();
        let vals =
            |k: u32| -> Vec<f64> { (0..4).map(|l| seq.q.at_leaf(k, l).get(0, 0).re).collect() };
        assert_eq!(vals(0), vec![1.0; 4]);
        assert_eq!(vals(1), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(vals(2), vec![0.0, 0.0, 1.0, 1.0]);
        assert!((seq.defect() - 0.5).abs() < 1e-15);
        assert!(seq.defect() <= l1_norm(&f));
    }

    #[test]
    fn small_function_gives_identity() {
        let g = Grid::new(1, 3, 0).unwrap();
        let f = MatFn::constant(g, &Mat::scalar(3, 0.5));
        let seq = cuculescu_run(&f, 1.0).unwrap();
        for k in 0..=3 {
            assert!(seq.p_fn(k).max_frob() == 0.0);
        }
    }

    #[test]
    fn rejects_negative() {
        let g = Grid::new(1, 2, 0).unwrap();
        let f = MatFn::scalar(g, 1, &[1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(
            cuculescu_run(&f, 1.0),
            Err(Error::NotPositive { .. })
        ));
        let f = MatFn::scalar(g, 1, &[1.0; 4]);
        assert!(cuculescu_run(&f, 0.0).is_err());
    }
}
