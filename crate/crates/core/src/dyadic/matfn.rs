use super::grid::Grid;
use crate::error::{Error, Result};
use crate::ncalg::{jacobi_eigen, HermMatrix, Mat, C64, TOL_HERM};

/// Piecewise-constant `M_d`-valued function on the leaves of a [`Grid`].
///
/// Leaves are stored in row-major cube order (first axis slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct MatFn {
    grid: Grid,
    d: usize,
    values: Vec<Mat>,
    hermitian: bool,
}

impl MatFn {
    pub fn new(grid: Grid, d: usize, values: Vec<Mat>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("matrix size d must be positive".into()));
        }
        if values.len() != grid.leaves() {
            return Err(Error::Mismatch(format!(
                "expected {} leaf values, got {}",
                grid.leaves(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|m| m.dim() != d) {
            return Err(Error::Mismatch(format!(
                "leaf {bad} has size {} instead of {d}",
                values[bad].dim()
            )));
        }
        Ok(MatFn {
            grid,
            d,
            values,
            hermitian: false,
        })
    }

    /// Builds a function whose leaf values are checked Hermitian.
    pub fn new_hermitian(grid: Grid, d: usize, values: Vec<Mat>) -> Result<Self> {
        let mut f = Self::new(grid, d, values)?;
        for v in f.values.iter_mut() {
            *v = HermMatrix::new(std::mem::replace(v, Mat::zeros(0)))?.into_inner();
        }
        f.hermitian = true;
        Ok(f)
    }

    pub fn from_fn(grid: Grid, d: usize, f: impl Fn(usize) -> Mat) -> Self {
        let values = (0..grid.leaves()).map(f).collect();
        MatFn {
            grid,
            d,
            values,
            hermitian: false,
        }
    }

    pub fn zeros(grid: Grid, d: usize) -> Self {
        Self::constant(grid, &Mat::zeros(d))
    }

    pub fn constant(grid: Grid, m: &Mat) -> Self {
        let herm = m.herm_deviation() == 0.0;
        MatFn {
            grid,
            d: m.dim(),
            values: vec![m.clone(); grid.leaves()],
            hermitian: herm,
        }
    }

    /// Lifts per-cube values at generation `k` to a leaf function.
    pub fn from_level(grid: Grid, d: usize, k: u32, cubes: &[Mat]) -> Self {
        assert_eq!(cubes.len(), grid.cubes_at(k));
        Self::from_fn(grid, d, |l| cubes[grid.ancestor_of_leaf(l, k)].clone())
    }

    /// Scalar function `x ↦ s(x)·1`.
    pub fn scalar(grid: Grid, d: usize, s: &[f64]) -> Self {
        assert_eq!(s.len(), grid.leaves());
        let mut f = Self::from_fn(grid, d, |l| Mat::scalar(d, s[l]));
        f.hermitian = true;
        f
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn values(&self) -> &[Mat] {
        &self.values
    }

    #[inline]
    pub fn at(&self, leaf: usize) -> &Mat {
        &self.values[leaf]
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub(crate) fn with_flag(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    /// Marks as Hermitian after checking every leaf.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new_hermitian(self.grid, self.d, self.values)
    }

    pub fn check_compatible(&self, other: &MatFn) -> Result<()> {
        if self.grid != other.grid || self.d != other.d {
            return Err(Error::Mismatch(format!(
                "{:?}/d={} vs {:?}/d={}",
                self.grid, self.d, other.grid, other.d
            )));
        }
        Ok(())
    }

    pub fn check_compatible_grid(&self, grid: Grid) -> Result<()> {
        if self.grid != grid {
            return Err(Error::Mismatch(format!("{:?} vs {:?}", self.grid, grid)));
        }
        Ok(())
    }

    /// Leafwise map; the output size may differ from the input's but must be uniform.
    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> MatFn {
        let values: Vec<Mat> = self.values.iter().map(f).collect();
        let d = values[0].dim();
        assert!(
            values.iter().all(|m| m.dim() == d),
            "map produced mixed sizes"
        );
        MatFn {
            grid: self.grid,
            d,
            values,
            hermitian: false,
        }
    }

    pub fn zip_map(&self, other: &MatFn, f: impl Fn(&Mat, &Mat) -> Mat) -> MatFn {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        MatFn {
            grid: self.grid,
            d: self.d,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
            hermitian: false,
        }
    }

    pub fn add(&self, o: &MatFn) -> MatFn {
        self.zip_map(o, |a, b| a + b)
            .with_flag(self.hermitian && o.hermitian)
    }

    pub fn sub(&self, o: &MatFn) -> MatFn {
        self.zip_map(o, |a, b| a - b)
            .with_flag(self.hermitian && o.hermitian)
    }

    pub fn add_assign(&mut self, o: &MatFn) {
        assert_eq!(self.grid, o.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&o.values) {
            *a += b;
        }
        self.hermitian &= o.hermitian;
    }

    pub fn scale(&self, c: f64) -> MatFn {
        self.map(|a| a.scale(c)).with_flag(self.hermitian)
    }

    /// Pointwise product `x ↦ self(x)·o(x)`.
    pub fn mul(&self, o: &MatFn) -> MatFn {
        self.zip_map(o, |a, b| a * b)
    }

    /// `x ↦ a(x) self(x) a(x)`.
    pub fn sandwich(&self, a: &MatFn) -> MatFn {
        a.zip_map(self, |p, x| p.sandwich(x))
            .with_flag(self.hermitian && a.hermitian)
    }

    /// `x ↦ l(x) self(x) r(x)`.
    pub fn between(&self, l: &MatFn, r: &MatFn) -> MatFn {
        let lx = l.mul(self);
        lx.mul(r)
    }

    /// Left multiplication by a constant matrix.
    pub fn lmul_const(&self, u: &Mat) -> MatFn {
        self.map(|a| u * a)
    }

    /// Right multiplication by a constant matrix.
    pub fn rmul_const(&self, u: &Mat) -> MatFn {
        self.map(|a| a * u)
    }

    pub fn adjoint(&self) -> MatFn {
        self.map(Mat::adjoint).with_flag(self.hermitian)
    }

    /// Leafwise complement `1 − self`.
    pub fn one_minus(&self) -> MatFn {
        let id = Mat::identity(self.d);
        self.map(|a| &id - a).with_flag(self.hermitian)
    }

    /// Largest leafwise Frobenius distance; an upper bound for the sup norm.
    pub fn max_dist(&self, o: &MatFn) -> f64 {
        self.values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| (a - b).frobenius())
            .fold(0.0, f64::max)
    }

    /// Largest leafwise Frobenius norm.
    pub fn max_frob(&self) -> f64 {
        self.values.iter().map(Mat::frobenius).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all leaves, with the leaf where it occurs.
    pub fn min_eigenvalue(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .map(|(l, m)| {
                let e = jacobi_eigen(m);
                (e.values.first().copied().unwrap_or(0.0), l)
            })
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Rejects functions with a leaf eigenvalue below `−tol·max(1,‖f‖_∞)`.
    pub fn check_positive(&self) -> Result<()> {
        let tol = TOL_HERM * self.max_frob().max(1.0);
        for v in &self.values {
            let dev = v.herm_deviation();
            if dev > tol * 1e2 {
                return Err(Error::NotHermitian {
                    deviation: dev,
                    tol: tol * 1e2,
                });
            }
        }
        let (min_eig, leaf) = self.min_eigenvalue();
        if min_eig < -1e-9 * self.max_frob().max(1.0) {
            return Err(Error::NotPositive { min_eig, leaf });
        }
        Ok(())
    }

    /// Whether all leaves outside the support subcube vanish.
    pub fn is_supported(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(l, v)| self.grid.in_support(l) || v.max_abs() == 0.0)
    }

    /// Per-cube averages at generation `k`.
    pub fn level_values(&self, k: u32) -> Result<Vec<Mat>> {
        self.check_gen(k, 0)?;
        let g = self.grid;
        let nc = g.cubes_at(k);
        let w = 1.0 / (g.leaves() / nc) as f64;
        let mut out = vec![Mat::zeros(self.d); nc];
        for (l, v) in self.values.iter().enumerate() {
            out[g.ancestor_of_leaf(l, k)] += v;
        }
        for m in out.iter_mut() {
            *m = m.scale(w);
        }
        Ok(out)
    }

    pub(crate) fn check_gen(&self, k: u32, min: u32) -> Result<()> {
        if k < min || k > self.grid.depth {
            return Err(Error::OutOfRange {
                what: "generation",
                value: k as i64,
                range: format!("[{min}, {}]", self.grid.depth),
            });
        }
        Ok(())
    }
}

/// Complex zero, handy in sums.
pub(crate) const CZERO: C64 = C64::new(0.0, 0.0);
