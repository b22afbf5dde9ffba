use serde::{Deserialize, Serialize};

use super::grid::{CubeIndex, Grid};
use super::matfn::MatFn;
use crate::error::{Error, Result};
use crate::ncalg::Mat;

/// Haar index `(Q, ε)` with `ε ∈ {±1}ⁿ \ {(1,…,1)}`.
///
/// `eps` is a bit pattern: bit `n-1-j` set means `ε_j = +1`. Numeric order of
/// `eps` is the lexicographic order of sign patterns with `−1 < +1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HaarIndex {
    pub cube: CubeIndex,
    pub eps: u8,
}

impl HaarIndex {
    pub fn new(n: u32, cube: CubeIndex, eps: u8) -> Result<Self> {
        if eps as usize >= (1usize << n) - 1 {
            return Err(Error::TrivialSignPattern);
        }
        Ok(HaarIndex { cube, eps })
    }

    /// Sign pattern from explicit signs.
    pub fn from_signs(cube: CubeIndex, signs: &[i8]) -> Result<Self> {
        let n = signs.len() as u32;
        let mut eps = 0u8;
        for &s in signs {
            eps = (eps << 1) | u8::from(s > 0);
        }
        Self::new(n, cube, eps)
    }

    pub fn signs(&self, n: u32) -> Vec<i8> {
        (0..n)
            .map(|j| {
                if (self.eps >> (n - 1 - j)) & 1 == 1 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    /// Value of `√|Q|·h` on child number `c` of `Q`.
    pub fn child_sign(&self, n: u32, c: usize) -> f64 {
        // factor j is 1 on the lower half, ε_j on the upper half
        let mut s = 1.0;
        for j in 0..n as usize {
            let upper = (c >> (n as usize - 1 - j)) & 1 == 1;
            let eps_plus = (self.eps >> (n as usize - 1 - j)) & 1 == 1;
            if upper && !eps_plus {
                s = -s;
            }
        }
        s
    }
}

/// Number of admissible sign patterns, `2ⁿ − 1`.
pub fn patterns(n: u32) -> u8 {
    ((1u32 << n) - 1) as u8
}

/// All Haar indices resolved by the grid, ordered by generation, cube, ε.
pub fn resolved_indices(grid: &Grid) -> Vec<HaarIndex> {
    let mut out = Vec::new();
    for k in 0..grid.depth {
        for c in 0..grid.cubes_at(k) {
            let cube = grid.cube(k, c);
            for eps in 0..patterns(grid.n) {
                out.push(HaarIndex { cube, eps });
            }
        }
    }
    out
}

fn check_resolved(grid: &Grid, h: &HaarIndex) -> Result<()> {
    if h.cube.gen >= grid.depth {
        return Err(Error::UnresolvedHaar {
            gen: h.cube.gen,
            depth: grid.depth,
        });
    }
    if h.eps >= patterns(grid.n) {
        return Err(Error::TrivialSignPattern);
    }
    Ok(())
}

/// Leaf values of `h_Q^ε`, normalized in `L₂([0,1)ⁿ)`.
pub fn haar_values(grid: &Grid, h: &HaarIndex) -> Result<Vec<f64>> {
    check_resolved(grid, h)?;
    let k = h.cube.gen;
    let amp = grid.measure_at(k).sqrt().recip();
    let qflat = h.cube.flat(grid.n);
    let mut out = vec![0.0; grid.leaves()];
    for (l, v) in out.iter_mut().enumerate() {
        if grid.ancestor_of_leaf(l, k) != qflat {
            continue;
        }
        let child = grid.cube(k + 1, grid.ancestor_of_leaf(l, k + 1));
        *v = amp * h.child_sign(grid.n, child_number(grid.n, &child));
    }
    Ok(out)
}

/// Position of `c` among the children of its parent.
pub fn child_number(n: u32, c: &CubeIndex) -> usize {
    let mut i = 0;
    for j in 0..n as usize {
        i = (i << 1) | (c.coords[j] & 1) as usize;
    }
    i
}

/// `h_Q^ε` as a scalar (`d = 1`) function.
pub fn haar_fn(grid: &Grid, h: &HaarIndex) -> Result<MatFn> {
    let v = haar_values(grid, h)?;
    Ok(MatFn::scalar(*grid, 1, &v))
}

/// `⟨f, h⟩ = ∫ f h`, computed by brute force over leaves.
pub fn haar_coeff(f: &MatFn, h: &HaarIndex) -> Result<Mat> {
    let grid = f.grid();
    let v = haar_values(&grid, h)?;
    let w = grid.leaf_measure();
    let mut acc = Mat::zeros(f.dim());
    for (l, &hv) in v.iter().enumerate() {
        if hv != 0.0 {
            acc.axpy(hv * w, f.at(l));
        }
    }
    Ok(acc)
}

/// All Haar coefficients, computed from child averages.
///
/// `out[k][cube][eps]` for generations `k < K`.
pub fn haar_coeffs_all(f: &MatFn) -> Vec<Vec<Vec<Mat>>> {
    let grid = f.grid();
    let n = grid.n;
    let nc = 1usize << n;
    let mut out = Vec::with_capacity(grid.depth as usize);
    for k in 0..grid.depth {
        let child_avgs = f.level_values(k + 1).expect("generation in range");
        // ⟨f,h⟩ = Σ_c |child| f_c √|Q|^{-1} sign_c = √|Q| 2^{-n} Σ_c sign_c f_c
        let amp = grid.measure_at(k).sqrt() / nc as f64;
        let mut level = Vec::with_capacity(grid.cubes_at(k));
        for c in 0..grid.cubes_at(k) {
            let cube = grid.cube(k, c);
            let kids: Vec<usize> = cube.children(n).iter().map(|ch| ch.flat(n)).collect();
            let mut per = Vec::with_capacity(patterns(n) as usize);
            for eps in 0..patterns(n) {
                let h = HaarIndex { cube, eps };
                let mut acc = Mat::zeros(f.dim());
                for (ci, &kid) in kids.iter().enumerate() {
                    acc.axpy(amp * h.child_sign(n, ci), &child_avgs[kid]);
                }
                per.push(acc);
            }
            level.push(per);
        }
        out.push(level);
    }
    out
}

/// `Σ_h c_h h` for matrix coefficients laid out as in [`haar_coeffs_all`].
pub fn haar_synthesize(grid: &Grid, d: usize, coeffs: &[Vec<Vec<Mat>>]) -> MatFn {
    let n = grid.n;
    let mut vals = vec![Mat::zeros(d); grid.leaves()];
    for (k, level) in coeffs.iter().enumerate() {
        let k = k as u32;
        let amp = grid.measure_at(k).sqrt().recip();
        for (l, v) in vals.iter_mut().enumerate() {
            let q = grid.ancestor_of_leaf(l, k);
            let child = grid.cube(k + 1, grid.ancestor_of_leaf(l, k + 1));
            let ci = child_number(n, &child);
            for (eps, c) in level[q].iter().enumerate() {
                let h = HaarIndex {
                    cube: grid.cube(k, q),
                    eps: eps as u8,
                };
                v.axpy(amp * h.child_sign(n, ci), c);
            }
        }
    }
    MatFn::from_fn(*grid, d, |l| vals[l].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::CubeIndex;

    #[test]
    fn root_haar_shape() {
        let g = Grid::new(1, 3, 0).unwrap();
        let h = HaarIndex::from_signs(CubeIndex::ROOT, &[-1]).unwrap();
        let v = haar_values(&g, &h).unwrap();
        assert_eq!(v, vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert!(HaarIndex::from_signs(CubeIndex::ROOT, &[1]).is_err());
        assert!(HaarIndex::from_signs(CubeIndex::ROOT, &[1, 1]).is_err());
    }

    #[test]
    fn unresolved_rejected() {
        let g = Grid::new(1, 2, 0).unwrap();
        let h = HaarIndex {
            cube: g.cube(2, 0),
            eps: 0,
        };
        assert!(matches!(
            haar_values(&g, &h),
            Err(Error::UnresolvedHaar { .. })
        ));
    }
}
