use super::mat::{Mat, C64};

/// Eigen-decomposition of a Hermitian matrix: `A = U diag(values) U*`.
///
/// `values` are ascending; column `i` of `vectors` belongs to `values[i]`.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, i: usize) -> Vec<C64> {
        let d = self.dim();
        (0..d).map(|r| self.vectors.get(r, i)).collect()
    }

    /// `U diag(w) U*` for arbitrary real weights.
    pub fn assemble(&self, weights: &[f64]) -> Mat {
        let d = self.dim();
        let mut out = Mat::zeros(d);
        for (c, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let ui = self.vectors.get(i, c) * w;
                for j in 0..d {
                    let v = out.get(i, j) + ui * self.vectors.get(j, c).conj();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Mat {
        self.assemble(&self.values)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi. Only the Hermitian part of `a` is used.
pub fn jacobi_eigen(a: &Mat) -> SpectralDecomp {
    let d = a.dim();
    let mut m = a.hermitian_part();
    let mut v = Mat::identity(d);
    let scale = m.frobenius();
    if d <= 1 || scale == 0.0 {
        let values = (0..d).map(|i| m.get(i, i).re).collect();
        return SpectralDecomp { values, vectors: v };
    }
    let target = scale * 1e-16;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += m.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let c = m.get(p, q);
                let cabs = c.norm();
                if cabs <= target * 1e-3 {
                    continue;
                }
                let phase = c / cabs; // e^{iθ}
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let tau = (aqq - app) / (2.0 * cabs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let ph_c = phase.conj(); // e^{-iθ}

                // columns: A ← A G, V ← V G
                for r in 0..d {
                    let ap = m.get(r, p);
                    let aq = m.get(r, q);
                    m.set(r, p, ap * cs - aq * ph_c * sn);
                    m.set(r, q, ap * sn + aq * ph_c * cs);
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, vp * cs - vq * ph_c * sn);
                    v.set(r, q, vp * sn + vq * ph_c * cs);
                }
                // rows: A ← G* A
                for col in 0..d {
                    let ap = m.get(p, col);
                    let aq = m.get(q, col);
                    m.set(p, col, ap * cs - aq * phase * sn);
                    m.set(q, col, ap * sn + aq * phase * cs);
                }
                m.set(p, q, C64::new(0.0, 0.0));
                m.set(q, p, C64::new(0.0, 0.0));
                m.set(p, p, C64::new(app - t * cabs, 0.0));
                m.set(q, q, C64::new(aqq + t * cabs, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Mat::from_fn(d, |r, c| v.get(r, order[c]));
    SpectralDecomp { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, seed: u64) -> Mat {
        // small deterministic LCG, enough for a unit test
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Mat::from_fn(d, |_, _| C64::new(next(), next())).hermitian_part()
    }

    #[test]
    fn reconstructs_and_is_unitary() {
        for d in 1..=8 {
            for seed in 0..5 {
                let a = sample(d, seed);
                let e = jacobi_eigen(&a);
                assert!((&e.reconstruct() - &a).frobenius() < 1e-12);
                let uu = &e.vectors.adjoint() * &e.vectors;
                assert!((&uu - &Mat::identity(d)).frobenius() < 1e-12);
                assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let e = jacobi_eigen(&Mat::identity(4));
        assert!(e.values.iter().all(|&v| v == 1.0));
        let e = jacobi_eigen(&Mat::diag(&[3.0, -1.0]));
        assert_eq!(e.values, vec![-1.0, 3.0]);
    }
}
