use nccz::dyadic::{expect, haar_fn, l1_norm, l2_norm, Grid, HaarIndex, MatFn};
use nccz::hardy::*;
use nccz::ncalg::Mat;
use nccz::operators::{
    HaarShiftSpec, KernelShape, OperatorSpec, PerfectDyadicSpec, Side, SmoothKernelSpec,
    TransformSpec,
};
use nccz::probes::{gaussian_mat, random_fn, random_hermitian, sample_rng, EnsembleSpec};
use nccz::report::CheckStatus;

fn grid(n: u32, k: u32) -> Grid {
    Grid::new(n, k, 0).unwrap()
}

#[test]
fn single_difference_square_functions() {
    let g = grid(1, 3);
    let a = random_hermitian(&mut sample_rng(1, 0), 3);
    let h = haar_fn(&g, &HaarIndex::new(1, g.cube(0, 0), 0).unwrap()).unwrap();
    let f = h.map(|m| a.scale(m.get(0, 0).re));
    let r = hardy_norms(&f, &[]).unwrap();
    let a1 = a.ntrace_norm();
    assert!((r.h1_col.unwrap() - a1).abs() < 1e-12);
    assert!((r.h1_row.unwrap() - a1).abs() < 1e-12);
    let b = bmo_norms(&f);
    assert!((b.bmo_col.unwrap() - a.op_norm()).abs() < 1e-12);
}

#[test]
fn haar_times_matrix_bmo() {
    let g = grid(1, 4);
    let a = gaussian_mat(&mut sample_rng(2, 0), 2);
    let h = haar_fn(&g, &HaarIndex::new(1, g.cube(0, 0), 0).unwrap()).unwrap();
    let f = h.map(|m| a.scale(m.get(0, 0).re));
    assert!((bmo_norms(&f).bmo_col.unwrap() - a.op_norm()).abs() < 1e-12);
    let c = MatFn::constant(g, &a);
    assert!(bmo_norms(&c).bmo_col.unwrap() < 1e-12);
}

#[test]
fn scalar_row_equals_column() {
    let g = grid(1, 5);
    let vals: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64 - 4.0).collect();
    let f = MatFn::scalar(g, 1, &vals);
    let r = all_norms(&f, &[1.5, 3.0]).unwrap();
    assert!((r.h1_row.unwrap() - r.h1_col.unwrap()).abs() < 1e-12);
    assert!((r.h1_row_cond.unwrap() - r.h1_col_cond.unwrap()).abs() < 1e-12);
    assert!((r.bmo_row.unwrap() - r.bmo_col.unwrap()).abs() < 1e-12);
    for (_, hr, hc) in &r.hp {
        assert!((hr - hc).abs() < 1e-12);
    }
}

#[test]
fn norm_symmetry_and_envelopes() {
    for i in 0..20u64 {
        let g = grid(1 + (i % 2) as u32, 3);
        let f = random_fn(&mut sample_rng(3, i), g, 1 + i as usize % 4);
        let r = all_norms(&f, &[2.0, 4.0]).unwrap();
        let s = all_norms(&f.adjoint(), &[2.0, 4.0]).unwrap();
        let pairs = [
            (r.h1_row, s.h1_col),
            (r.h1_row_cond, s.h1_col_cond),
            (r.bmo_row, s.bmo_col),
            (r.bmo_row_cond, s.bmo_col_cond),
            (r.h1_diag, s.h1_diag),
            (r.bmo_diag, s.bmo_diag),
        ];
        for (a, b) in pairs {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-12);
        }
        for ((_, hr, _), (_, _, hc)) in r.hp.iter().zip(&s.hp) {
            assert!((hr - hc).abs() < 1e-12);
        }
        let fm = f.sub(&expect(&f, 0).unwrap());
        // Parseval
        let h2 = r.hp[0].2;
        assert!((h2 - l2_norm(&fm)).abs() < 1e-10);
        assert!(r.h1_diag.unwrap() >= l1_norm(&fm) * (1.0 - 1e-12));
        assert!(r.h1_col.unwrap() <= l2_norm(&fm) * (1.0 + 1e-12));
        assert!(r.bmo_col.unwrap() <= 2.0 * nccz::dyadic::linf_norm(&f) * (1.0 + 1e-12));
    }
}

#[test]
fn two_leaf_mei_atom() {
    let g = grid(1, 3);
    let a = gaussian_mat(&mut sample_rng(4, 0), 2);
    let mut vals = vec![Mat::zeros(2); 8];
    vals[2] = a.clone();
    vals[3] = a.scale(-1.0);
    let b = MatFn::new(g, 2, vals).unwrap();
    let q = g.cube(2, 1);
    for column in [true, false] {
        let at = mei_atom(&b, q, column, 1.0).unwrap();
        let c = verify_atom(&at);
        assert!(c.valid, "{c:?}");
        assert!((c.norm - c.norm_bound).abs() < 1e-12);
        assert!(c.l1 <= 1.0 + 1e-12);
    }
    assert!(mei_atom(&b, g.cube(3, 0), true, 1.0).is_err());
}

#[test]
fn full_projection_perrin_atom() {
    let g = grid(1, 3);
    let b = random_fn(&mut sample_rng(5, 0), g, 2);
    let e = MatFn::constant(g, &Mat::identity(2));
    let at = perrin_atom(&b, 0, &e, true, 1.0).unwrap();
    assert!(expect(&at.a, 0).unwrap().max_frob() < 1e-12);
    assert!((l2_norm(&at.a) - 1.0).abs() < 1e-12);
    assert!(verify_atom(&at).valid);
    let zero = MatFn::zeros(g, 2);
    assert!(perrin_atom(&b, 0, &zero, true, 1.0).is_err());
}

#[test]
fn random_atoms_verify() {
    for kind in AtomKind::ALL {
        for seed in 0..100u64 {
            let g = grid(1 + (seed % 2) as u32, 3);
            let at = make_atom(kind, g, 1 + seed as usize % 4, seed).unwrap();
            let c = verify_atom(&at);
            assert!(c.valid, "{kind:?} {seed} {c:?}");
            if matches!(kind, AtomKind::MeiColumn | AtomKind::MeiRow) {
                let q = at.cube.unwrap();
                let (l, r) = hansen_sides(&at.a, &q, kind.is_column());
                assert!(l <= r * (1.0 + 1e-12));
                assert!(c.l1 <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn zero_atom_gives_zero() {
    let g = grid(1, 3);
    let op = PerfectDyadicSpec::constant_multiplier(g, &Mat::identity(2), Side::Column);
    assert_eq!(op.apply(&MatFn::zeros(g, 2)).unwrap().max_frob(), 0.0);
}

fn ops(g: Grid, d: usize) -> Vec<OperatorSpec> {
    let mut rng = sample_rng(6, 0);
    let rho = random_fn(&mut rng, g, d);
    let xi: Vec<Vec<Mat>> = (0..g.depth)
        .map(|k| {
            (0..g.cubes_at(k))
                .map(|_| gaussian_mat(&mut rng, d))
                .collect()
        })
        .collect();
    vec![
        OperatorSpec::Transform(
            TransformSpec::from_levels(g, d, xi.clone(), Side::Column).unwrap(),
        ),
        OperatorSpec::Transform(TransformSpec::paraproduct(rho.clone(), Side::Column)),
        OperatorSpec::Transform(TransformSpec::paraproduct_adjoint(
            rho.clone(),
            Side::Column,
        )),
        OperatorSpec::Perfect(PerfectDyadicSpec::haar_multiplier(g, d, xi, Side::Column).unwrap()),
        OperatorSpec::Perfect(PerfectDyadicSpec::paraproduct(rho, Side::Column)),
        OperatorSpec::Shift(
            HaarShiftSpec::random_normalized(&mut rng, g, d, 1, 1, Side::Column).unwrap(),
        ),
        OperatorSpec::Smooth(
            SmoothKernelSpec::new(
                g,
                KernelShape::Riesz { axis: 0 },
                Mat::identity(d),
                Side::Column,
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn atom_bounds_hold() {
    let g = grid(1, 4);
    let ens = EnsembleSpec::new(g, 2, 30, 8);
    for op in ops(g, 2) {
        for kind in AtomKind::ALL {
            let (rep, rows) = atom_operator_bound(&op, kind, &ens).unwrap();
            assert_eq!(
                rep.failures(),
                0,
                "{} {kind:?} {:#?}",
                op.kind_name(),
                rep.records
            );
            assert_eq!(rows.len(), 30);
        }
    }
}

#[test]
fn perrin_chain_uniform_bound() {
    let g = grid(1, 4);
    let ens = EnsembleSpec::new(g, 3, 40, 9);
    for op in ops(g, 3).into_iter().take(3) {
        let c = l2_bound(&op).unwrap();
        let (_, rows) = atom_operator_bound(&op, AtomKind::PerrinC, &ens).unwrap();
        for r in rows {
            assert!(r.total <= c * (1.0 + 1e-10));
        }
    }
}

#[test]
fn paraproduct_bmo_cases() {
    let g = grid(1, 4);
    let ens = EnsembleSpec::new(g, 2, 50, 10);
    let c = MatFn::constant(g, &gaussian_mat(&mut sample_rng(10, 0), 2));
    let (rep, rows) = paraproduct_bmo_estimate(&c, &ens).unwrap();
    assert_eq!(rep.failures(), 0);
    assert!(rows.iter().all(|r| r.col.0 < 1e-12));
    for d in 1..=4 {
        let ens = EnsembleSpec::new(g, d, 50, 11);
        let rho = random_fn(&mut sample_rng(11, 99), g, d);
        let (rep, _) = paraproduct_bmo_estimate(&rho, &ens).unwrap();
        assert_eq!(rep.failures(), 0, "{:#?}", rep.records);
        assert!(rep
            .records
            .iter()
            .any(|r| r.status == CheckStatus::Measured));
    }
    // f ≡ 1: Π f = ρ − ρ_0, tight
    let rho = random_fn(&mut sample_rng(12, 0), g, 2);
    let one = MatFn::constant(g, &Mat::identity(2));
    let s = paraproduct_bmo_sample(&rho, &one).unwrap();
    assert!((s.col.0 - s.col.1).abs() < 1e-10);
    assert!(s.telescope < 1e-12);
}

#[test]
fn john_nirenberg_sample_below_bmo() {
    for i in 0..20u64 {
        let g = grid(1, 4);
        let mut rng = sample_rng(13, i);
        let f = random_fn(&mut rng, g, 1 + i as usize % 3);
        let lower = john_nirenberg_lower(&f, 200, &mut rng);
        let bmo = bmo_norms(&f).bmo_cond().unwrap();
        assert!(lower > 0.0 && lower <= bmo * (1.0 + 1e-12));
    }
}
