use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::{Mat, C64};

/// Seeded ensemble of positive matrix functions `G*G/d`, optionally spiked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub samples: usize,
    pub seed: u64,
    pub grid: Grid,
    pub d: usize,
    /// Rank-one bursts added on randomly chosen leaves.
    pub spikes: usize,
    pub spike_scale: f64,
}

impl EnsembleSpec {
    pub fn new(grid: Grid, d: usize, samples: usize, seed: u64) -> Self {
        EnsembleSpec {
            samples,
            seed,
            grid,
            d,
            spikes: 0,
            spike_scale: 0.0,
        }
    }

    pub fn with_spikes(mut self, spikes: usize, scale: f64) -> Self {
        self.spikes = spikes;
        self.spike_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > 16 {
            return Err(Error::OutOfRange {
                what: "d",
                value: self.d as i64,
                range: "[1, 16]".into(),
            });
        }
        if !(self.spike_scale >= 0.0) || !self.spike_scale.is_finite() {
            return Err(Error::Invalid(format!(
                "spike scale must be finite and ≥ 0, got {}",
                self.spike_scale
            )));
        }
        Ok(())
    }

    /// Independent generator for sample `i`.
    pub fn rng(&self, i: usize) -> ChaCha8Rng {
        sample_rng(self.seed, i as u64)
    }

    pub fn sample(&self, i: usize) -> MatFn {
        let mut rng = self.rng(i);
        random_positive(&mut rng, self.grid, self.d, self.spikes, self.spike_scale)
    }

    /// All samples, generated in parallel and returned in index order.
    pub fn generate(&self) -> Vec<MatFn> {
        (0..self.samples)
            .into_par_iter()
            .map(|i| self.sample(i))
            .collect()
    }
}

pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_mat<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    Mat::from_fn(d, |_, _| gaussian_c64(rng))
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    (0..d).map(|_| gaussian_c64(rng)).collect()
}

pub fn random_unit_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v = gaussian_vec(rng, d);
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `G*G/d`.
pub fn wishart<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    let g = gaussian_mat(rng, d);
    (&g.adjoint() * &g).scale(1.0 / d as f64).hermitian_part()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    gaussian_mat(rng, d).hermitian_part()
}

/// Uniformly random direction scaled to operator norm `norm`.
pub fn random_with_norm<R: Rng + ?Sized>(rng: &mut R, d: usize, norm: f64) -> Mat {
    let g = gaussian_mat(rng, d);
    let n = g.op_norm();
    if n == 0.0 {
        Mat::zeros(d)
    } else {
        g.scale(norm / n)
    }
}

/// Projection onto the span of `rank` Gaussian vectors.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Mat {
    let rank = rank.min(d);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let mut v = gaussian_vec(rng, d);
        for b in &basis {
            let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let mut p = Mat::zeros(d);
    for b in &basis {
        p += &Mat::outer(b, b);
    }
    p.hermitian_part()
}

/// Positive sample: Wishart on the support subcube, plus rank-one spikes.
pub fn random_positive<R: Rng + ?Sized>(
    rng: &mut R,
    grid: Grid,
    d: usize,
    spikes: usize,
    spike_scale: f64,
) -> MatFn {
    let mut vals: Vec<Mat> = (0..grid.leaves())
        .map(|l| {
            let w = wishart(rng, d);
            if grid.in_support(l) {
                w
            } else {
                Mat::zeros(d)
            }
        })
        .collect();
    let support: Vec<usize> = (0..grid.leaves()).filter(|&l| grid.in_support(l)).collect();
    for _ in 0..spikes {
        let l = support[rng.random_range(0..support.len())];
        let v = random_unit_vec(rng, d);
        let burst = Mat::outer(&v, &v).scale(spike_scale);
        vals[l] = (&vals[l] + &burst).hermitian_part();
    }
    MatFn::new(grid, d, vals)
        .expect("sizes consistent")
        .into_hermitian()
        .expect("Hermitian by construction")
}

pub fn random_hermitian_fn<R: Rng + ?Sized>(rng: &mut R, grid: Grid, d: usize) -> MatFn {
    let vals = (0..grid.leaves())
        .map(|_| random_hermitian(rng, d))
        .collect();
    MatFn::new(grid, d, vals)
        .expect("sizes consistent")
        .into_hermitian()
        .expect("Hermitian by construction")
}

pub fn random_fn<R: Rng + ?Sized>(rng: &mut R, grid: Grid, d: usize) -> MatFn {
    let vals = (0..grid.leaves()).map(|_| gaussian_mat(rng, d)).collect();
    MatFn::new(grid, d, vals).expect("sizes consistent")
}

/// Random function with every leaf value of operator norm at most `bound`.
pub fn random_bounded_fn<R: Rng + ?Sized>(rng: &mut R, grid: Grid, d: usize, bound: f64) -> MatFn {
    let vals = (0..grid.leaves())
        .map(|_| {
            let r: f64 = rng.random();
            random_with_norm(rng, d, bound * r)
        })
        .collect();
    MatFn::new(grid, d, vals).expect("sizes consistent")
}
