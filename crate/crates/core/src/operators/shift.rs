use rand::Rng;

use super::transform::Side;
use crate::dyadic::{
    child_number, haar_coeffs_all, haar_synthesize, patterns, CubeIndex, Grid, HaarIndex, MatFn,
};
use crate::error::{Error, Result};
use crate::ncalg::Mat;
use crate::probes::random_with_norm;

/// One coefficient `α^Q_{RS}` between channels `h_R^{ε_R}` and `h_S^{ε_S}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCoeff {
    pub q: CubeIndex,
    pub r: CubeIndex,
    pub s: CubeIndex,
    pub eps_r: u8,
    pub eps_s: u8,
    pub alpha: Mat,
}

/// Haar shift of complexity `(r, s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarShiftSpec {
    pub grid: Grid,
    pub d: usize,
    pub r: u32,
    pub s: u32,
    pub side: Side,
    pub coeffs: Vec<ShiftCoeff>,
}

impl HaarShiftSpec {
    /// Validates containment, resolution and sign patterns of every coefficient.
    pub fn new(
        grid: Grid,
        d: usize,
        r: u32,
        s: u32,
        side: Side,
        coeffs: Vec<ShiftCoeff>,
    ) -> Result<Self> {
        let top = grid.depth as i64 - 1 - r.max(s) as i64;
        for c in &coeffs {
            if c.q.gen as i64 > top {
                return Err(Error::UnresolvedHaar {
                    gen: c.q.gen + r.max(s),
                    depth: grid.depth,
                });
            }
            if c.r.gen != c.q.gen + r || c.s.gen != c.q.gen + s {
                return Err(Error::NonDescendant(format!(
                    "R, S generations {}, {} for Q of generation {} with complexity ({r},{s})",
                    c.r.gen, c.s.gen, c.q.gen
                )));
            }
            if !c.q.contains(&c.r) || !c.q.contains(&c.s) {
                return Err(Error::NonDescendant(format!(
                    "{:?} / {:?} not inside {:?}",
                    c.r, c.s, c.q
                )));
            }
            if c.eps_r >= patterns(grid.n) || c.eps_s >= patterns(grid.n) {
                return Err(Error::TrivialSignPattern);
            }
            if c.alpha.dim() != d {
                return Err(Error::Mismatch(format!("α of size {}", c.alpha.dim())));
            }
        }
        Ok(HaarShiftSpec {
            grid,
            d,
            r,
            s,
            side,
            coeffs,
        })
    }

    /// Generations of `Q` the grid resolves, `0..=K−1−max(r,s)`.
    pub fn q_generations(grid: &Grid, r: u32, s: u32) -> std::ops::Range<u32> {
        0..(grid.depth).saturating_sub(r.max(s))
    }

    /// `α^Q_{QQ} = 1` on every channel: complexity `(0,0)`.
    pub fn identity(grid: Grid, d: usize, side: Side) -> Self {
        let mut coeffs = Vec::new();
        for k in Self::q_generations(&grid, 0, 0) {
            for c in 0..grid.cubes_at(k) {
                let q = grid.cube(k, c);
                for eps in 0..patterns(grid.n) {
                    coeffs.push(ShiftCoeff {
                        q,
                        r: q,
                        s: q,
                        eps_r: eps,
                        eps_s: eps,
                        alpha: Mat::identity(d),
                    });
                }
            }
        }
        HaarShiftSpec {
            grid,
            d,
            r: 0,
            s: 0,
            side,
            coeffs,
        }
    }

    /// Dyadic Hilbert transform on `n = 1`: `h_J ⊗ (h_{J−} − h_{J+})` scaled
    /// by `scale`, with complexity `(0,1)`.
    pub fn dyadic_hilbert(grid: Grid, d: usize, side: Side, scale: f64) -> Result<Self> {
        Self::hilbert_like(grid, d, side, scale, false)
    }

    /// The transpose kernel `(h_{J−} − h_{J+}) ⊗ h_J`, complexity `(1,0)`.
    pub fn dyadic_hilbert_transpose(grid: Grid, d: usize, side: Side, scale: f64) -> Result<Self> {
        Self::hilbert_like(grid, d, side, scale, true)
    }

    fn hilbert_like(grid: Grid, d: usize, side: Side, scale: f64, transpose: bool) -> Result<Self> {
        if grid.n != 1 {
            return Err(Error::Invalid(
                "the dyadic Hilbert transform needs n = 1".into(),
            ));
        }
        let mut coeffs = Vec::new();
        for k in Self::q_generations(&grid, 0, 1) {
            for c in 0..grid.cubes_at(k) {
                let j = grid.cube(k, c);
                for (child, sign) in j.children(1).into_iter().zip([1.0, -1.0]) {
                    let (r, s) = if transpose { (child, j) } else { (j, child) };
                    coeffs.push(ShiftCoeff {
                        q: j,
                        r,
                        s,
                        eps_r: 0,
                        eps_s: 0,
                        alpha: Mat::scalar(d, sign * scale),
                    });
                }
            }
        }
        let (r, s) = if transpose { (1, 0) } else { (0, 1) };
        Self::new(grid, d, r, s, side, coeffs)
    }

    /// Random coefficients with `‖α‖ ≤ √(|R||S|)/|Q|` and one sign channel
    /// per `R` and per `S` inside each `Q`.
    pub fn random_normalized<R: Rng + ?Sized>(
        rng: &mut R,
        grid: Grid,
        d: usize,
        r: u32,
        s: u32,
        side: Side,
    ) -> Result<Self> {
        let n = grid.n;
        let bound = Self::normalized_bound(n, r, s);
        let np = patterns(n);
        let mut coeffs = Vec::new();
        for k in Self::q_generations(&grid, r, s) {
            for c in 0..grid.cubes_at(k) {
                let q = grid.cube(k, c);
                let rs = descendants_of(&q, n, r);
                let ss = descendants_of(&q, n, s);
                let eps_r: Vec<u8> = rs.iter().map(|_| rng.random_range(0..np)).collect();
                let eps_s: Vec<u8> = ss.iter().map(|_| rng.random_range(0..np)).collect();
                for (ri, rc) in rs.iter().enumerate() {
                    for (si, sc) in ss.iter().enumerate() {
                        let u: f64 = rng.random();
                        coeffs.push(ShiftCoeff {
                            q,
                            r: *rc,
                            s: *sc,
                            eps_r: eps_r[ri],
                            eps_s: eps_s[si],
                            alpha: random_with_norm(rng, d, bound * u),
                        });
                    }
                }
            }
        }
        Self::new(grid, d, r, s, side, coeffs)
    }

    /// `√(|R||S|)/|Q| = 2^{−(r+s)n/2}`.
    pub fn normalized_bound(n: u32, r: u32, s: u32) -> f64 {
        (-(((r + s) * n) as f64) / 2.0).exp2()
    }

    /// `max ‖α‖ / (√(|R||S|)/|Q|)`.
    pub fn overshoot(&self) -> f64 {
        let b = Self::normalized_bound(self.grid.n, self.r, self.s);
        self.coeffs
            .iter()
            .map(|c| c.alpha.op_norm() / b)
            .fold(0.0, f64::max)
    }

    /// Each `R` and each `S` uses a single sign channel within its `Q`.
    pub fn single_channel(&self) -> bool {
        use std::collections::HashMap;
        let mut seen: HashMap<(bool, CubeIndex), u8> = HashMap::new();
        for c in &self.coeffs {
            for (tag, cube, eps) in [(true, c.r, c.eps_r), (false, c.s, c.eps_s)] {
                if *seen.entry((tag, cube)).or_insert(eps) != eps {
                    return false;
                }
            }
        }
        true
    }

    /// Hypotheses under which `‖Ш f‖₂ ≤ ‖f‖₂` is guaranteed.
    pub fn is_normalized(&self) -> bool {
        self.overshoot() <= 1.0 + 1e-12 && self.single_channel()
    }

    pub fn apply(&self, f: &MatFn) -> Result<MatFn> {
        self.apply_filtered(f, |_| true)
    }

    /// Sum restricted to the `Q` whose generation passes `keep`.
    pub fn apply_filtered(&self, f: &MatFn, keep: impl Fn(u32) -> bool) -> Result<MatFn> {
        self.check_input(f)?;
        let g = self.grid;
        let n = g.n;
        let hc = haar_coeffs_all(f);
        let mut out: Vec<Vec<Vec<Mat>>> = (0..g.depth)
            .map(|k| vec![vec![Mat::zeros(self.d); patterns(n) as usize]; g.cubes_at(k)])
            .collect();
        for c in &self.coeffs {
            if !keep(c.q.gen) {
                continue;
            }
            let input = &hc[c.s.gen as usize][c.s.flat(n)][c.eps_s as usize];
            out[c.r.gen as usize][c.r.flat(n)][c.eps_r as usize] += &self.side.mul(&c.alpha, input);
        }
        Ok(haar_synthesize(&g, self.d, &out))
    }

    fn check_input(&self, f: &MatFn) -> Result<()> {
        f.check_compatible_grid(self.grid)?;
        if f.dim() != self.d {
            return Err(Error::Mismatch(format!("d = {} vs {}", f.dim(), self.d)));
        }
        Ok(())
    }

    /// `k(x, y) = Σ α^Q_{RS} h_R(x) h_S(y)` on leaves.
    pub fn kernel(&self, x: usize, y: usize) -> Mat {
        let mut acc = Mat::zeros(self.d);
        for c in &self.coeffs {
            let hx = haar_at(&self.grid, c.r, c.eps_r, x);
            if hx == 0.0 {
                continue;
            }
            let hy = haar_at(&self.grid, c.s, c.eps_s, y);
            if hy != 0.0 {
                acc.axpy(hx * hy, &c.alpha);
            }
        }
        acc
    }

    /// Dense kernel evaluation `∫ k(x,y) f(y) dy`.
    pub fn apply_kernel(&self, f: &MatFn) -> Result<MatFn> {
        self.check_input(f)?;
        let g = self.grid;
        let w = g.leaf_measure();
        let vals = (0..g.leaves())
            .map(|x| {
                let mut acc = Mat::zeros(self.d);
                for y in 0..g.leaves() {
                    let k = self.kernel(x, y);
                    acc.axpy(w, &self.side.mul(&k, f.at(y)));
                }
                acc
            })
            .collect();
        MatFn::new(g, self.d, vals)
    }

    pub fn conjugate_side(&self) -> Self {
        let mut out = self.clone();
        out.side = self.side.flip();
        for c in &mut out.coeffs {
            c.alpha = c.alpha.adjoint();
        }
        out
    }
}

/// Generation-`gen(q)+depth` cubes inside `q`, in flat order.
fn descendants_of(q: &CubeIndex, n: u32, depth: u32) -> Vec<CubeIndex> {
    let mut cur = vec![*q];
    for _ in 0..depth {
        cur = cur.iter().flat_map(|c| c.children(n)).collect();
    }
    cur.sort_by_key(|c| c.flat(n));
    cur
}

/// `h_Q^ε` at a leaf.
pub(crate) fn haar_at(g: &Grid, q: CubeIndex, eps: u8, leaf: usize) -> f64 {
    if g.ancestor_of_leaf(leaf, q.gen) != q.flat(g.n) {
        return 0.0;
    }
    let child = g.cube(q.gen + 1, g.ancestor_of_leaf(leaf, q.gen + 1));
    let h = HaarIndex { cube: q, eps };
    h.child_sign(g.n, child_number(g.n, &child)) / g.measure_at(q.gen).sqrt()
}
