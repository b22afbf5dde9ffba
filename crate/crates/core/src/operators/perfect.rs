use super::transform::{
    check_levels, paraproduct_adjoint_path, paraproduct_path, transform_path, Side,
};
use crate::dyadic::{Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::Mat;

#[derive(Clone, Debug, PartialEq)]
pub enum PerfectKind {
    /// `H_ξ`; `xi[j][cube] = ξ(Q)` for parent cubes of generation `j < K`.
    HaarMultiplier {
        xi: Vec<Vec<Mat>>,
    },
    Paraproduct {
        rho: MatFn,
    },
    ParaproductAdjoint {
        rho: MatFn,
    },
}

/// Perfect dyadic operator, evaluable through its kernel or through
/// martingale differences.
#[derive(Clone, Debug, PartialEq)]
pub struct PerfectDyadicSpec {
    pub grid: Grid,
    pub d: usize,
    pub kind: PerfectKind,
    pub side: Side,
}

impl PerfectDyadicSpec {
    pub fn haar_multiplier(grid: Grid, d: usize, xi: Vec<Vec<Mat>>, side: Side) -> Result<Self> {
        check_levels(grid, d, &xi)?;
        Ok(PerfectDyadicSpec {
            grid,
            d,
            kind: PerfectKind::HaarMultiplier { xi },
            side,
        })
    }

    /// `ξ(Q) = m` for every cube.
    pub fn constant_multiplier(grid: Grid, m: &Mat, side: Side) -> Self {
        let xi = (0..grid.depth)
            .map(|j| vec![m.clone(); grid.cubes_at(j)])
            .collect();
        PerfectDyadicSpec {
            grid,
            d: m.dim(),
            kind: PerfectKind::HaarMultiplier { xi },
            side,
        }
    }

    pub fn paraproduct(rho: MatFn, side: Side) -> Self {
        PerfectDyadicSpec {
            grid: rho.grid(),
            d: rho.dim(),
            kind: PerfectKind::Paraproduct { rho },
            side,
        }
    }

    pub fn paraproduct_adjoint(rho: MatFn, side: Side) -> Self {
        PerfectDyadicSpec {
            grid: rho.grid(),
            d: rho.dim(),
            kind: PerfectKind::ParaproductAdjoint { rho },
            side,
        }
    }

    fn check_input(&self, f: &MatFn) -> Result<()> {
        f.check_compatible_grid(self.grid)?;
        if f.dim() != self.d {
            return Err(Error::Mismatch(format!("d = {} vs {}", f.dim(), self.d)));
        }
        Ok(())
    }

    /// Martingale-difference evaluation.
    pub fn apply(&self, f: &MatFn) -> Result<MatFn> {
        self.check_input(f)?;
        Ok(match &self.kind {
            PerfectKind::HaarMultiplier { xi } => transform_path(xi, self.side, f),
            PerfectKind::Paraproduct { rho } => paraproduct_path(rho, self.side, f),
            PerfectKind::ParaproductAdjoint { rho } => paraproduct_adjoint_path(rho, self.side, f),
        })
    }

    /// Kernel value `k(x, y)` between two leaves.
    pub fn kernel(&self, x: usize, y: usize) -> Mat {
        self.kernel_with(&self.symbol_levels(), x, y)
    }

    fn symbol_levels(&self) -> Vec<Vec<Mat>> {
        match &self.kind {
            PerfectKind::HaarMultiplier { .. } => Vec::new(),
            PerfectKind::Paraproduct { rho } | PerfectKind::ParaproductAdjoint { rho } => (0
                ..=self.grid.depth)
                .map(|k| rho.level_values(k).expect("generation in range"))
                .collect(),
        }
    }

    fn kernel_with(&self, levels: &[Vec<Mat>], x: usize, y: usize) -> Mat {
        let g = self.grid;
        let mut acc = Mat::zeros(self.d);
        match &self.kind {
            PerfectKind::HaarMultiplier { xi } => {
                // Σ_Q ξ(Q̂)/|Q| 1_Q(x) (1_Q − 2^{−n} 1_{Q̂})(y)
                let frac = (-(g.n as f64)).exp2();
                for j in 1..=g.depth {
                    let px = g.ancestor_of_leaf(x, j - 1);
                    if px != g.ancestor_of_leaf(y, j - 1) {
                        break;
                    }
                    let same = g.ancestor_of_leaf(x, j) == g.ancestor_of_leaf(y, j);
                    let w = (f64::from(u8::from(same)) - frac) / g.measure_at(j);
                    acc.axpy(w, &xi[j as usize - 1][px]);
                }
            }
            PerfectKind::Paraproduct { .. } | PerfectKind::ParaproductAdjoint { .. } => {
                let adjoint = matches!(self.kind, PerfectKind::ParaproductAdjoint { .. });
                // Σ_Q (ρ_Q − ρ_{Q̂})/|Q̂| 1_Q(x) 1_{Q̂}(y), or its transpose-adjoint
                let (a, b) = if adjoint { (y, x) } else { (x, y) };
                for j in 1..=g.depth {
                    let pa = g.ancestor_of_leaf(a, j - 1);
                    if pa != g.ancestor_of_leaf(b, j - 1) {
                        break;
                    }
                    let qa = g.ancestor_of_leaf(a, j);
                    let diff = &levels[j as usize][qa] - &levels[j as usize - 1][pa];
                    let diff = if adjoint { diff.adjoint() } else { diff };
                    acc.axpy(1.0 / g.measure_at(j - 1), &diff);
                }
            }
        }
        acc
    }

    /// Kernel-sum evaluation `∫ k(x,y) f(y) dy` over leaves.
    pub fn apply_kernel(&self, f: &MatFn) -> Result<MatFn> {
        self.check_input(f)?;
        let g = self.grid;
        let w = g.leaf_measure();
        let levels = self.symbol_levels();
        let vals = (0..g.leaves())
            .map(|x| {
                let mut acc = Mat::zeros(self.d);
                for y in 0..g.leaves() {
                    let k = self.kernel_with(&levels, x, y);
                    acc.axpy(w, &self.side.mul(&k, f.at(y)));
                }
                acc
            })
            .collect();
        MatFn::new(g, self.d, vals)
    }

    /// Largest variation of the kernel over `Q × R` for disjoint siblings.
    pub fn kernel_variation(&self) -> f64 {
        let g = self.grid;
        let levels = self.symbol_levels();
        let mut worst = 0.0f64;
        for j in 1..=g.depth {
            for p in 0..g.cubes_at(j - 1) {
                let kids: Vec<usize> = g
                    .cube(j - 1, p)
                    .children(g.n)
                    .iter()
                    .map(|c| c.flat(g.n))
                    .collect();
                for &qa in &kids {
                    for &qb in &kids {
                        if qa == qb {
                            continue;
                        }
                        let xs = g.leaves_of(j, qa);
                        let ys = g.leaves_of(j, qb);
                        let base = self.kernel_with(&levels, xs[0], ys[0]);
                        for &x in &xs {
                            for &y in &ys {
                                worst =
                                    worst.max((&self.kernel_with(&levels, x, y) - &base).max_abs());
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// Coefficients adjoint-conjugated and side swapped: `(T f)* = T'(f*)`.
    pub fn conjugate_side(&self) -> Self {
        let kind = match &self.kind {
            PerfectKind::HaarMultiplier { xi } => PerfectKind::HaarMultiplier {
                xi: xi
                    .iter()
                    .map(|l| l.iter().map(Mat::adjoint).collect())
                    .collect(),
            },
            PerfectKind::Paraproduct { rho } => PerfectKind::Paraproduct { rho: rho.adjoint() },
            PerfectKind::ParaproductAdjoint { rho } => {
                PerfectKind::ParaproductAdjoint { rho: rho.adjoint() }
            }
        };
        PerfectDyadicSpec {
            kind,
            side: self.side.flip(),
            ..self.clone()
        }
    }
}
