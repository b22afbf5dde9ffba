use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    d: usize,
    data: Vec<C64>,
}

impl Mat {
    pub fn zeros(d: usize) -> Self {
        Mat {
            d,
            data: vec![C64::new(0.0, 0.0); d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, 1.0)
    }

    pub fn scalar(d: usize, c: f64) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = C64::new(c, 0.0);
        }
        m
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(f(i, j));
            }
        }
        Mat { d, data }
    }

    /// Builds a matrix from row-major entries; panics if the length is not a square.
    pub fn from_vec(d: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), d * d, "expected {} entries", d * d);
        Mat { d, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * d + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-one matrix u v*.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let d = u.len();
        Self::from_fn(d, |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.d + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        Self::from_fn(d, |i, j| self.data[j * d + i].conj())
    }

    pub fn scale(&self, c: f64) -> Self {
        Mat {
            d: self.d,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_c(&self, c: C64) -> Self {
        Mat {
            d: self.d,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: f64, other: &Mat) {
        debug_assert_eq!(self.d, other.d);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    /// Unnormalized trace Σ a_ii.
    pub fn trace(&self) -> C64 {
        (0..self.d).map(|i| self.data[i * self.d + i]).sum()
    }

    /// Normalized trace, tr(1) = 1.
    pub fn ntrace(&self) -> C64 {
        self.trace() / self.d as f64
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A*‖_F.
    pub fn herm_deviation(&self) -> f64 {
        let d = self.d;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += (self.data[i * d + j] - self.data[j * d + i].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// (A + A*)/2.
    pub fn hermitian_part(&self) -> Self {
        let d = self.d;
        Self::from_fn(d, |i, j| {
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        })
    }

    /// `self · other · self` for a (typically projection) `self`.
    pub fn sandwich(&self, inner: &Mat) -> Mat {
        &(self * inner) * self
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        if self.data.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return 0.0;
        }
        let gram = (&self.adjoint() * self).hermitian_part();
        let eig = super::eig::jacobi_eigen(&gram);
        eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = (&self.adjoint() * self).hermitian_part();
        super::eig::jacobi_eigen(&gram)
            .values
            .into_iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }

    /// Normalized Schatten-1 norm tr|A| with tr(1) = 1.
    pub fn ntrace_norm(&self) -> f64 {
        self.singular_values().iter().sum::<f64>() / self.d as f64
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        let d = self.d;
        debug_assert_eq!(d, rhs.d);
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let o = &mut out[i * d..(i + 1) * d];
                for j in 0..d {
                    o[j] += a * row[j];
                }
            }
        }
        Mat { d, data: out }
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.d, rhs.d);
        Mat {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.d, rhs.d);
        Mat {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl AddAssign<&Mat> for Mat {
    fn add_assign(&mut self, rhs: &Mat) {
        debug_assert_eq!(self.d, rhs.d);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Mat> for Mat {
    fn sub_assign(&mut self, rhs: &Mat) {
        debug_assert_eq!(self.d, rhs.d);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_adjoint() {
        let a = Mat::from_fn(2, |i, j| C64::new(i as f64, j as f64));
        let b = Mat::identity(2);
        assert_eq!(&a * &b, a);
        let aa = a.adjoint().adjoint();
        assert_eq!(aa, a);
        // (AB)* = B*A*
        let c = Mat::from_fn(2, |i, j| C64::new((i + 2 * j) as f64, 1.0));
        let lhs = (&a * &c).adjoint();
        let rhs = &c.adjoint() * &a.adjoint();
        assert!((&lhs - &rhs).frobenius() < 1e-14);
    }

    #[test]
    fn norms_of_diagonal() {
        let m = Mat::diag(&[3.0, -1.0]);
        assert!((m.op_norm() - 3.0).abs() < 1e-12);
        assert!((m.ntrace_norm() - 2.0).abs() < 1e-12);
        assert!((m.ntrace().re - 1.0).abs() < 1e-15);
    }
}
