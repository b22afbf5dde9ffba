//! Independent scalar and dense-matrix reference implementations on `n = 1`.
//! Nothing here calls into the library beyond reading values.

use nccz::dyadic::MatFn;
use nccz::ncalg::Mat;
use nccz::operators::{HaarShiftSpec, Side};

pub fn scalars(f: &MatFn) -> Vec<f64> {
    (0..f.grid().leaves())
        .map(|l| f.at(l).get(0, 0).re)
        .collect()
}

/// Generation-`k` average of the block holding `leaf`.
pub fn avg(v: &[f64], k: u32, depth: u32, leaf: usize) -> f64 {
    let w = 1usize << (depth - k);
    let start = (leaf / w) * w;
    v[start..start + w].iter().sum::<f64>() / w as f64
}

/// Generation-`k` block averages of a leaf array.
pub fn cond(v: &[f64], k: u32, depth: u32) -> Vec<f64> {
    (0..v.len()).map(|l| avg(v, k, depth, l)).collect()
}

/// `max_{j ≤ k} f_j(x)` per leaf.
pub fn running_max(v: &[f64], k: u32, depth: u32) -> Vec<f64> {
    (0..v.len())
        .map(|l| {
            (0..=k)
                .map(|j| avg(v, j, depth, l))
                .fold(f64::MIN, f64::max)
        })
        .collect()
}

/// Indicator of `max_{j ≤ k} f_j ≤ λ`.
pub fn alive(v: &[f64], lambda: f64, k: u32, depth: u32) -> Vec<f64> {
    running_max(v, k, depth)
        .into_iter()
        .map(|m| if m <= lambda { 1.0 } else { 0.0 })
        .collect()
}

/// First generation with `f_k > λ`, if any.
pub fn stop_time(v: &[f64], lambda: f64, depth: u32, leaf: usize) -> Option<u32> {
    (0..=depth).find(|&k| avg(v, k, depth, leaf) > lambda)
}

/// Classical split: `good = f_τ` where the stopping time fires, `f` elsewhere.
pub fn classical_cz(v: &[f64], lambda: f64, depth: u32) -> (Vec<f64>, Vec<f64>) {
    (0..v.len())
        .map(|l| match stop_time(v, lambda, depth, l) {
            None => (v[l], 0.0),
            Some(t) => {
                let ft = avg(v, t, depth, l);
                (ft, v[l] - ft)
            }
        })
        .unzip()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Classical Gundy differences `(dα_k, dβ_k, dγ_k)` for `k = 1..=depth`.
pub fn classical_gundy(v: &[f64], lambda: f64, depth: u32) -> Vec<[Vec<f64>; 3]> {
    (1..=depth)
        .map(|k| {
            let df = sub(&cond(v, k, depth), &cond(v, k - 1, depth));
            let qk = alive(v, lambda, k, depth);
            let qprev = alive(v, lambda, k - 1, depth);
            let stopped = mul(&qk, &df);
            let e = cond(&stopped, k - 1, depth);
            let da = sub(&stopped, &e);
            let db = sub(&mul(&qprev, &df), &stopped)
                .iter()
                .zip(&e)
                .map(|(x, y)| x + y)
                .collect();
            let dg = df.iter().zip(&qprev).map(|(x, q)| (1.0 - q) * x).collect();
            [da, db, dg]
        })
        .collect()
}

/// Weak-type ratios `[split, residual, direct]` of a `±1` Haar multiplier,
/// `signs[k][cube]` on generation `k`.
pub fn scalar_weak(f: &[f64], k: u32, signs: &[Vec<f64>], s_min: i32, ells: &[i32]) -> [f64; 3] {
    let leaves = f.len();
    let avg = |gen: u32, x: usize| -> f64 {
        let w = leaves >> gen;
        let c = x / w;
        f[c * w..(c + 1) * w].iter().sum::<f64>() / w as f64
    };
    let lam_min = (s_min as f64).exp2();
    // ψ_k(x) = 1 iff max_{i ≤ k} f_i(x) ≤ 2^{s_min}
    let psi = |gen: u32, x: usize| -> f64 { f64::from((0..=gen).all(|i| avg(i, x) <= lam_min)) };
    let mut tc = vec![0.0; leaves];
    let mut tpsi = vec![0.0; leaves];
    let mut tf = vec![0.0; leaves];
    for x in 0..leaves {
        for kk in 1..=k {
            let df = avg(kk, x) - avg(kk - 1, x);
            let p = psi(kk - 1, x);
            let sign = signs[kk as usize - 1][x / (leaves >> (kk - 1))];
            tc[x] += sign * (1.0 - p) * df;
            tpsi[x] += sign * p * df;
            tf[x] += sign * df;
        }
    }
    let l1: f64 = f.iter().map(|v| v.abs()).sum::<f64>() / leaves as f64;
    let tail =
        |v: &[f64], lam: f64| v.iter().filter(|x| x.abs() > lam).count() as f64 / leaves as f64;
    let mut out = [0.0f64; 3];
    for &ell in ells {
        let lam = (ell as f64).exp2();
        out[0] = out[0].max(lam * tail(&tc, lam) / l1);
        out[1] = out[1].max(lam * tail(&tpsi, lam) / l1);
        out[2] = out[2].max(lam * tail(&tf, lam) / l1);
    }
    out
}

/// `L₂`-normalized Haar function of the generation-`gen` interval `j`,
/// positive on the left half.
pub fn haar(depth: u32, gen: u32, j: usize, leaf: usize) -> f64 {
    let width = 1usize << (depth - gen);
    if leaf / width != j {
        return 0.0;
    }
    let amp = (gen as f64 / 2.0).exp2();
    if leaf % width < width / 2 {
        amp
    } else {
        -amp
    }
}

/// Dense scalar kernel of the dyadic Hilbert transform, or of its transpose.
pub fn hilbert_dense(k: u32, transpose: bool) -> Vec<Vec<f64>> {
    let leaves = 1usize << k;
    let mut m = vec![vec![0.0; leaves]; leaves];
    for gen in 0..k - 1 {
        for j in 0..1usize << gen {
            for x in 0..leaves {
                for y in 0..leaves {
                    let kv = haar(k, gen, j, x)
                        * (haar(k, gen + 1, 2 * j, y) - haar(k, gen + 1, 2 * j + 1, y));
                    if transpose {
                        m[y][x] += kv;
                    } else {
                        m[x][y] += kv;
                    }
                }
            }
        }
    }
    m
}

/// Dense matrix kernel `k(x, y) = Σ α h_R(x) h_S(y)` of an `n = 1` shift,
/// read from its coefficient list.
pub fn shift_dense(sh: &HaarShiftSpec) -> Vec<Vec<Mat>> {
    assert_eq!(sh.grid.n, 1);
    let k = sh.grid.depth;
    let leaves = 1usize << k;
    let mut m = vec![vec![Mat::zeros(sh.d); leaves]; leaves];
    for c in &sh.coeffs {
        let (r, s) = (c.r.coords[0] as usize, c.s.coords[0] as usize);
        for (x, row) in m.iter_mut().enumerate() {
            let hx = haar(k, c.r.gen, r, x);
            if hx == 0.0 {
                continue;
            }
            for (y, cell) in row.iter_mut().enumerate() {
                let hy = haar(k, c.s.gen, s, y);
                if hy != 0.0 {
                    cell.axpy(hx * hy, &c.alpha);
                }
            }
        }
    }
    m
}

/// `∫ k(x,y) f(y) dy` (row side: `∫ f(y) k(x,y) dy`) with a dense kernel.
pub fn apply_dense(kernel: &[Vec<Mat>], side: Side, f: &MatFn) -> MatFn {
    let w = f.grid().leaf_measure();
    MatFn::from_fn(f.grid(), f.dim(), |x| {
        let mut acc = Mat::zeros(f.dim());
        for (y, kv) in kernel[x].iter().enumerate() {
            let term = match side {
                Side::Column => kv * f.at(y),
                Side::Row => f.at(y) * kv,
            };
            acc.axpy(w, &term);
        }
        acc
    })
}

pub fn scalar_kernel(dense: &[Vec<f64>], d: usize) -> Vec<Vec<Mat>> {
    dense
        .iter()
        .map(|row| row.iter().map(|&v| Mat::scalar(d, v)).collect())
        .collect()
}
