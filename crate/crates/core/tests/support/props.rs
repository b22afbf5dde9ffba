//! Structural property bodies, one randomized case per seed.

use nccz::cuculescu::{lacunary_build, required_s_max};
use nccz::dyadic::*;
use nccz::hardy::all_norms;
use nccz::ncalg::*;
use nccz::probes::{random_fn, random_positive, random_projection, sample_rng};
use rand::Rng;

pub type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn small_grid(n: u32, k: u32) -> Grid {
    Grid::new(n, if n == 2 { k.min(3) } else { k }, 0).unwrap()
}

fn dist(a: &ProjMatrix, b: &ProjMatrix) -> f64 {
    (&**a - &**b).op_norm()
}

/// `Σ_j π_{j,k} + ψ_k = 1`, orthogonality, idempotence and nesting of the
/// lacunary family.
pub fn pi_partition(seed: u64) -> Outcome {
    let mut rng = sample_rng(seed, 0);
    let d = rng.random_range(1..=4);
    let k = rng.random_range(2..=4);
    let n = rng.random_range(1..=2);
    let s_min = rng.random_range(-5..=-1);
    let g = small_grid(n, k);
    let f = random_positive(&mut rng, g, d, 1, 12.0);
    let s_max = required_s_max(linf_norm(&f)).max(s_min + 1);
    let fam = lacunary_build(&f, s_min, s_max).map_err(|e| e.to_string())?;
    let c = fam.check(&f).map_err(|e| e.to_string())?;
    ensure!(c.partition < 1e-8, "partition {:?}", c);
    ensure!(c.pi_orthogonal < 1e-8, "orthogonality {:?}", c);
    ensure!(c.pi_idempotent < 1e-8, "idempotence {:?}", c);
    ensure!(c.nesting_j < 1e-8 && c.nesting_k < 1e-8, "nesting {:?}", c);
    Ok(())
}

/// Meet and join are the lattice operations of the projection lattice.
pub fn lattice_laws(seed: u64) -> Outcome {
    let mut rng = sample_rng(seed, 1);
    let d = rng.random_range(1..=5);
    let rp = rng.random_range(0..=d);
    let rq = rng.random_range(0..=d);
    let p = ProjMatrix::new(random_projection(&mut rng, d, rp)).unwrap();
    let q = ProjMatrix::new(random_projection(&mut rng, d, rq)).unwrap();
    let meet = proj_meet(&[&p, &q]).unwrap();
    let join = proj_join(&[&p, &q]).unwrap();
    let tol = 1e-8;
    ensure!(
        leq_deviation(&meet, &p) < tol && leq_deviation(&meet, &q) < tol,
        "meet bound"
    );
    ensure!(
        leq_deviation(&p, &join) < tol && leq_deviation(&q, &join) < tol,
        "join bound"
    );
    ensure!(
        dist(&proj_meet(&[&q, &p]).unwrap(), &meet) < tol,
        "meet commutes"
    );
    ensure!(
        dist(&proj_join(&[&q, &p]).unwrap(), &join) < tol,
        "join commutes"
    );
    ensure!(dist(&proj_meet(&[&p, &p]).unwrap(), &p) < tol, "idempotent");
    ensure!(
        dist(&proj_meet(&[&p, &ProjMatrix::identity(d)]).unwrap(), &p) < tol,
        "unit 1"
    );
    ensure!(
        dist(&proj_join(&[&p, &ProjMatrix::zero(d)]).unwrap(), &p) < tol,
        "unit 0"
    );
    let dm = proj_join(&[&p.complement(), &q.complement()])
        .unwrap()
        .complement();
    ensure!(dist(&dm, &meet) < tol, "De Morgan");
    ensure!(
        dist(&proj_meet(&[&p, &join]).unwrap(), &p) < tol,
        "absorption ∧"
    );
    ensure!(
        dist(&proj_join(&[&p, &meet]).unwrap(), &p) < tol,
        "absorption ∨"
    );
    let rs = rng.random_range(0..=d);
    let s = ProjMatrix::new(random_projection(&mut rng, d, rs)).unwrap();
    let big = proj_join(&[&p, &s]).unwrap();
    ensure!(
        dist(&proj_meet(&[&p, &big]).unwrap(), &p) < tol,
        "nested meet"
    );
    ensure!(proj_leq(&p, &big), "nested order");
    ensure!(
        meet.rank() + join.rank() == p.rank() + q.rank(),
        "rank formula {} + {} vs {} + {}",
        meet.rank(),
        join.rank(),
        p.rank(),
        q.rank()
    );
    Ok(())
}

pub fn haar_orthonormal(seed: u64) -> Outcome {
    let mut rng = sample_rng(seed, 2);
    let k = rng.random_range(1..=4);
    let n = rng.random_range(1..=2);
    let g = small_grid(n, k);
    let idx = resolved_indices(&g);
    let i = rng.random_range(0..idx.len());
    let j = rng.random_range(0..idx.len());
    let hi = haar_fn(&g, &idx[i]).unwrap();
    let hj = haar_fn(&g, &idx[j]).unwrap();
    let ip = inner(&hi, &hj).re;
    let want = if i == j { 1.0 } else { 0.0 };
    ensure!((ip - want).abs() < 1e-12, "⟨h_i, h_j⟩ = {ip}");
    ensure!(phi_trace(&hi).norm() < 1e-12, "mean of h_i");
    Ok(())
}

/// Synthesis inverts analysis, fast coefficients match integrals, Parseval.
pub fn haar_reconstruction(seed: u64) -> Outcome {
    let mut rng = sample_rng(seed, 3);
    let d = rng.random_range(1..=3);
    let k = rng.random_range(1..=4);
    let n = rng.random_range(1..=2);
    let g = small_grid(n, k);
    let f = random_fn(&mut rng, g, d);
    let coeffs = haar_coeffs_all(&f);
    let back = haar_synthesize(&g, d, &coeffs).add(&expect(&f, 0).unwrap());
    ensure!(
        back.max_dist(&f) < 1e-10,
        "reconstruction {}",
        back.max_dist(&f)
    );
    for h in resolved_indices(&g) {
        let c = &coeffs[h.cube.gen as usize][h.cube.flat(g.n)][h.eps as usize];
        ensure!(
            (c - &haar_coeff(&f, &h).unwrap()).max_abs() < 1e-12,
            "coefficient {:?}",
            h
        );
    }
    let sq: f64 = coeffs
        .iter()
        .flatten()
        .flatten()
        .map(|c| c.frobenius().powi(2) / d as f64)
        .sum();
    let fm = f.sub(&expect(&f, 0).unwrap());
    ensure!(
        (sq - l2_norm(&fm).powi(2)).abs() < 1e-10 * (1.0 + sq),
        "Parseval"
    );
    Ok(())
}

/// Row norms of `f` are the column norms of `f*`.
pub fn norm_symmetry(seed: u64) -> Outcome {
    let mut rng = sample_rng(seed, 4);
    let d = rng.random_range(1..=3);
    let k = rng.random_range(2..=4);
    let n = rng.random_range(1..=2);
    let g = small_grid(n, k);
    let f = random_fn(&mut rng, g, d);
    let r = all_norms(&f, &[1.5, 3.0]).map_err(|e| e.to_string())?;
    let s = all_norms(&f.adjoint(), &[1.5, 3.0]).map_err(|e| e.to_string())?;
    let pairs = [
        (r.h1_row, s.h1_col),
        (r.h1_col, s.h1_row),
        (r.h1_row_cond, s.h1_col_cond),
        (r.bmo_row, s.bmo_col),
        (r.bmo_row_cond, s.bmo_col_cond),
        (r.h1_diag, s.h1_diag),
        (r.bmo_diag, s.bmo_diag),
    ];
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        let (Some(a), Some(b)) = (a, b) else {
            return Err(format!("pair {i}: norm missing"));
        };
        ensure!((a - b).abs() < 1e-10 * (1.0 + a), "pair {i}: {a} vs {b}");
    }
    for ((_, hr, hc), (_, sr, sc)) in r.hp.iter().zip(&s.hp) {
        ensure!((hr - sc).abs() < 1e-10 * (1.0 + hr), "h_p row/column");
        ensure!((hc - sr).abs() < 1e-10 * (1.0 + hc), "h_p column/row");
    }
    let (a, b) = (l1_norm(&f), l1_norm(&f.adjoint()));
    ensure!((a - b).abs() < 1e-12 * (1.0 + a), "L1 {a} vs {b}");
    Ok(())
}

/// Name and body of every suite.
pub const SUITES: [(&str, fn(u64) -> Outcome); 5] = [
    ("lacunary partition and orthogonality", pi_partition),
    ("projection lattice laws", lattice_laws),
    ("Haar orthonormality", haar_orthonormal),
    ("Haar reconstruction", haar_reconstruction),
    ("norm symmetry under adjoints", norm_symmetry),
];
