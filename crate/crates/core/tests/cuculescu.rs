mod support;

use nccz::cuculescu::*;
use nccz::dyadic::{l1_norm, l2_norm, linf_norm, Grid, MatFn};
use nccz::ncalg::Mat;
use nccz::probes::{random_positive, sample_rng, EnsembleSpec};
use rand::Rng;
use support::oracle::{avg, running_max, scalars, stop_time};

fn grid(k: u32) -> Grid {
    Grid::new(1, k, 0).unwrap()
}

fn random_scalar(seed: u64, depth: u32, spiky: bool) -> Vec<f64> {
    let mut rng = sample_rng(seed, 0);
    (0..1usize << depth)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * 2.0;
            if spiky && rng.random::<f64>() < 0.2 {
                x * 10.0
            } else {
                x
            }
        })
        .collect()
}

#[test]
fn stopping_time_example() {
    let g = grid(2);
    let f = MatFn::scalar(g, 1, &[4.0, 0.0, 0.0, 0.0]);
    let seq = cuculescu_run(&f, 1.0).unwrap();
    assert_eq!(scalars(&seq.q_fn(0)), vec![1.0; 4]);
    assert_eq!(scalars(&seq.q_fn(1)), vec![0.0, 0.0, 1.0, 1.0]);
    assert_eq!(scalars(&seq.q_fn(2)), vec![0.0, 0.0, 1.0, 1.0]);
    assert!((seq.defect() - 0.5).abs() < 1e-15);
    assert!(seq.defect() <= l1_norm(&f) / 1.0);
}

#[test]
fn scalar_cuculescu_is_stopping_time() {
    for seed in 0..50u64 {
        let depth = 4 + (seed % 3) as u32;
        let v = random_scalar(seed, depth, true);
        let f = MatFn::scalar(grid(depth), 1, &v);
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            let seq = cuculescu_run(&f, lambda).unwrap();
            for k in 0..=depth {
                let got = scalars(&seq.q_fn(k as i64));
                let want: Vec<f64> = running_max(&v, k, depth)
                    .iter()
                    .map(|&m| if m <= lambda { 1.0 } else { 0.0 })
                    .collect();
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-12, "seed {seed} λ {lambda} k {k}");
                }
            }
        }
    }
}

#[test]
fn scalar_cz_is_classical_split() {
    for seed in 0..50u64 {
        let depth = 4 + (seed % 3) as u32;
        let v = random_scalar(100 + seed, depth, true);
        let f = MatFn::scalar(grid(depth), 1, &v);
        let lambda = 1.5;
        let parts = cz_decompose(&f, lambda).unwrap();
        assert!(parts.g_off.max_frob() < 1e-12);
        assert!(parts.b_off.max_frob() < 1e-12);
        let gd = scalars(&parts.g_d);
        let bd = scalars(&parts.b_d);
        for l in 0..v.len() {
            let (good, bad) = match stop_time(&v, lambda, depth, l) {
                None => (v[l], 0.0),
                Some(t) => {
                    let ft = avg(&v, t, depth, l);
                    (ft, v[l] - ft)
                }
            };
            assert!((gd[l] - good).abs() < 1e-12);
            assert!((bd[l] - bad).abs() < 1e-12);
        }
        let delta = delta_formulas_check(&f, &parts);
        assert!(delta.max() < 1e-9);
    }
}

#[test]
fn trivial_levels() {
    let g = grid(4);
    let f = MatFn::constant(g, &Mat::scalar(3, 0.5));
    let seq = cuculescu_run(&f, 1.0).unwrap();
    for k in 0..=4 {
        assert_eq!(seq.p_fn(k).max_frob(), 0.0);
    }
    let parts = cz_from_seq(&f, seq);
    assert!(parts.g_d.max_dist(&f) < 1e-15);
    assert_eq!(delta_formulas_check(&f, &parts).max(), 0.0);

    // f ≡ c with 2^{s_min} > c: π ≡ 0, ψ ≡ 1
    let fam = lacunary_build(&f, 0, 2).unwrap();
    for k in 0..=4 {
        assert!(
            fam.psi_fn(k)
                .max_dist(&MatFn::constant(g, &Mat::identity(3)))
                < 1e-12
        );
        for j in fam.pi_range() {
            assert!(fam.pi_fn(k, j).max_frob() < 1e-12);
        }
    }
    let qh = qhat_build(&fam, 1).unwrap();
    assert!(qh.defect().abs() < 1e-12);
    let z = zeta_build(&qh, 2).unwrap();
    assert!(z.defect().abs() < 1e-12);
}

#[test]
fn ensemble_cuculescu_and_cz() {
    let mut admissible = 0;
    for d in 1..=4 {
        let ens = EnsembleSpec::new(grid(5), d, 20, 7).with_spikes(2, 20.0);
        for (i, f) in ens.generate().iter().enumerate() {
            let f_l1 = l1_norm(f);
            for lambda in [0.5, 2.0, 8.0] {
                let seq = cuculescu_run(f, lambda).unwrap();
                let c = cuculescu_check(f, &seq);
                assert!(c.decreasing < 1e-8, "{d} {i} {c:?}");
                assert!(c.commutation < 1e-8, "{d} {i} {c:?}");
                assert!(c.level_gap > -1e-8, "{d} {i} {c:?}");
                assert!(c.p_orthogonality < 1e-8 && c.p_sum < 1e-8);
                assert!(c.weighted_defect <= f_l1 * (1.0 + 1e-12));

                let parts = cz_from_seq(f, seq);
                let diag = parts.diagnostics(f);
                assert!(diag.sum_residual < 1e-10);
                assert!(diag.series_residual < 1e-8);
                // the L2 estimate needs f_0 ≤ λ at the root
                if diag.root_admissible {
                    admissible += 1;
                    assert!(diag.g_d_l2_sq <= diag.g_d_bound * (1.0 + 1e-12), "{diag:?}");
                }
                assert!(
                    diag.b_d_l1_sum <= diag.b_d_bound * (1.0 + 1e-12),
                    "{diag:?}"
                );
                assert!(delta_formulas_check(f, &parts).max() < 1e-9);
            }
        }
    }
    assert!(admissible > 50);
}

#[test]
fn rejects_bad_input() {
    let g = grid(2);
    let neg = MatFn::scalar(g, 1, &[1.0, -1.0, 0.0, 0.0]);
    assert!(cuculescu_run(&neg, 1.0).is_err());
    let f = MatFn::scalar(g, 1, &[5.0, 0.0, 0.0, 0.0]);
    assert!(matches!(
        lacunary_build(&f, 0, 2),
        Err(nccz::Error::LacunaryRange { required: 3, .. })
    ));
    assert!(lacunary_build(&f, 3, 3).is_err());
    let fam = lacunary_build(&f, 0, 3).unwrap();
    assert!(qhat_build(&fam, 0).is_err());
    assert!(qhat_build(&fam, 4).is_err());
    let other = MatFn::zeros(grid(3), 1);
    assert!(triangular_truncate(&other, &fam, 0, TriPart::Upper).is_err());
}

#[test]
fn scalar_lacunary_level_sets() {
    for seed in 0..50u64 {
        let depth = 4 + (seed % 3) as u32;
        let v = random_scalar(200 + seed, depth, true);
        let f = MatFn::scalar(grid(depth), 1, &v);
        let s_min = -3;
        let s_max = required_s_max(linf_norm(&f)).max(s_min + 1);
        let fam = lacunary_build(&f, s_min, s_max).unwrap();
        for k in 0..=depth {
            let mk = running_max(&v, k, depth);
            let psi = scalars(&fam.psi_fn(k));
            for l in 0..v.len() {
                let want = (mk[l] <= (s_min as f64).exp2()) as u8 as f64;
                assert!((psi[l] - want).abs() < 1e-12);
            }
            for j in fam.pi_range() {
                let pi = scalars(&fam.pi_fn(k, j));
                for l in 0..v.len() {
                    let lo = ((j - 1) as f64).exp2();
                    let hi = (j as f64).exp2();
                    let want = (mk[l] > lo && mk[l] <= hi) as u8 as f64;
                    assert!((pi[l] - want).abs() < 1e-12, "seed {seed} k {k} j {j}");
                }
            }
        }

        // truncations collapse: LT = 0, UT = (1 − ψ)x
        let (_, split) = row_col_split(&f, s_min, s_max).unwrap();
        assert!(split.f_r.max_frob() < 1e-12);
        let dfs = nccz::dyadic::differences(&f);
        let mut fc = MatFn::zeros(f.grid(), 1);
        for k in 1..=depth {
            let ut = triangular_truncate(&dfs[k as usize], &fam, k - 1, TriPart::Upper).unwrap();
            let psi = fam.psi_fn(k - 1);
            assert!(ut.max_dist(&psi.one_minus().mul(&dfs[k as usize])) < 1e-12);
            fc.add_assign(&ut);
        }
        assert!(split.f_c.max_dist(&fc) < 1e-12);

        // q̂ = {running max ≤ 2^ℓ}; ζ at s = 0 is q̂
        for ell in s_min + 1..=s_max {
            let qh = qhat_build(&fam, ell).unwrap();
            let mk = running_max(&v, depth, depth);
            let q = scalars(&qh.q_final());
            for l in 0..v.len() {
                let want = (mk[l] <= (ell as f64).exp2()) as u8 as f64;
                assert!((q[l] - want).abs() < 1e-12);
            }
            let z = zeta_build(&qh, 0).unwrap();
            assert!(z.zeta.max_dist(&qh.q_final()) < 1e-10);
        }
    }
}

#[test]
fn ensemble_lacunary_identities() {
    for d in 1..=4 {
        let ens = EnsembleSpec::new(grid(4 + d as u32 % 3), d, 12, 21).with_spikes(1, 16.0);
        for f in ens.generate() {
            let s_min = -4;
            let s_max = required_s_max(linf_norm(&f)).max(s_min + 1);
            let fam = lacunary_build(&f, s_min, s_max).unwrap();
            let c = fam.check(&f).unwrap();
            assert!(c.pi_idempotent < 1e-8, "{c:?}");
            assert!(c.pi_orthogonal < 1e-8, "{c:?}");
            assert!(c.partition < 1e-8, "{c:?}");
            assert!(c.key_identity_qhat < 1e-8, "{c:?}");
            assert!(c.key_identity_p < 1e-8, "{c:?}");
            assert!(c.nesting_j < 1e-8 && c.nesting_k < 1e-8, "{c:?}");
            assert!(c.psi_df <= c.psi_df_bound * (1.0 + 1e-12), "{c:?}");

            let split = row_col_split_with(&f, &fam).unwrap();
            let back = split.f_r.add(&split.f_c).add(&split.residual);
            assert!(back.max_dist(&f) < 1e-12);
            assert!(split.residual_linf <= split.residual_bound);

            let f_l1 = l1_norm(&f);
            for ell in s_min + 1..=s_max {
                let qh = qhat_build(&fam, ell).unwrap();
                assert!(qh.lambda() * qh.defect() <= 2.0 * f_l1 * (1.0 + 1e-12));
                assert!(qh.below_levels_deviation() < 1e-8);
                for s in 0..=2u32 {
                    let z = zeta_build(&qh, s).unwrap();
                    let bound = (s as f64 * f.grid().n as f64 + 1.0).exp2() * f_l1;
                    assert!(qh.lambda() * z.defect() <= bound * (1.0 + 1e-12));
                    assert!(z.dominance_deviation(&qh) < 1e-8);
                    assert!(z.nested_rho_overlap() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn truncation_contracts_in_l2() {
    let g = grid(4);
    let mut rng = sample_rng(31, 0);
    for d in 1..=4 {
        let f = random_positive(&mut rng, g, d, 2, 10.0);
        let fam = lacunary_build(&f, -3, required_s_max(linf_norm(&f)).max(-2)).unwrap();
        for _ in 0..5 {
            let x = nccz::probes::random_fn(&mut rng, g, d);
            for k in 0..=4 {
                let ut = triangular_truncate(&x, &fam, k, TriPart::Upper).unwrap();
                let lt = triangular_truncate(&x, &fam, k, TriPart::Lower).unwrap();
                assert!(l2_norm(&ut) <= l2_norm(&x) * (1.0 + 1e-12));
                // UT + LT = (1 − ψ) x (1 − ψ)
                let omp = fam.psi_fn(k).one_minus();
                assert!(ut.add(&lt).max_dist(&x.sandwich(&omp)) < 1e-10);
            }
        }
    }
}

#[test]
fn single_block_truncation() {
    // c ∈ (2^{s_min}, 2^{s_min+1}] gives ψ = 0 and one π block equal to 1
    let g = grid(3);
    let f = MatFn::constant(g, &Mat::scalar(2, 1.5));
    let fam = lacunary_build(&f, 0, 1).unwrap();
    let x = nccz::probes::random_fn(&mut sample_rng(32, 0), g, 2);
    for k in 0..=3 {
        assert!(
            triangular_truncate(&x, &fam, k, TriPart::Upper)
                .unwrap()
                .max_dist(&x)
                < 1e-12
        );
        assert!(
            triangular_truncate(&x, &fam, k, TriPart::Lower)
                .unwrap()
                .max_frob()
                < 1e-12
        );
    }
}
