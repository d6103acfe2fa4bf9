mod common;

use common::{dense_from_group, dense_inverse, dense_linf_norm, dense_top_eigenvalue, f2, standard, z2, KESTEN};
use schurlab::spectral::inverse_column_l1_norms;
use schurlab::{
    build_operator, inverse_lp_norms, solve_shifted, top_eigenvalue, CgOptions, Error, InverseOptions, Operator,
    OperatorF32, PowerOptions, DEFAULT_NODE_BUDGET,
};

fn op(g: &schurlab::GroupDescriptor, r: u32) -> Operator {
    build_operator(&standard(g), r, DEFAULT_NODE_BUDGET).unwrap()
}

#[test]
fn radius_one_eigenvalue_is_one_half() {
    let m = op(&f2(), 1);
    let rep = top_eigenvalue(&m, &PowerOptions::default()).unwrap();
    assert!(rep.converged);
    assert!((rep.lambda_max - 0.5).abs() < 1e-9, "{}", rep.lambda_max);
    let dense = dense_from_group(m.ball(), &standard(&f2()));
    assert!((dense_top_eigenvalue(&dense) - 0.5).abs() < 1e-12);
}

#[test]
fn power_iteration_matches_dense_eigensolver() {
    for g in [f2(), z2()] {
        let mu = standard(&g);
        let mut prev = 0.0;
        for r in 1..=6 {
            let m = op(&g, r);
            let dense = dense_top_eigenvalue(&dense_from_group(m.ball(), &mu));
            let rep = top_eigenvalue(&m, &PowerOptions::default()).unwrap();
            assert!((rep.lambda_max - dense).abs() < 1e-7, "R={r}: {} vs {dense}", rep.lambda_max);
            assert!(dense >= prev - 1e-12, "not monotone at R={r}");
            assert!(dense < 1.0);
            if g.kind() == schurlab::GroupKind::FreeGroup {
                assert!(dense < KESTEN);
            }
            prev = dense;
        }
    }
}

#[test]
fn cg_agrees_with_dense_lu() {
    for g in [f2(), z2()] {
        let mu = standard(&g);
        for r in 1..=4 {
            let m = op(&g, r);
            let inv = dense_inverse(&dense_from_group(m.ball(), &mu));
            let n = m.dim();
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let sol = solve_shifted(&m, &e, &CgOptions::with_tol(1e-12)).unwrap();
                let err = (0..n).map(|k| (sol.x[k] - inv[(k, i)]).abs()).fold(0.0, f64::max);
                assert!(err < 1e-8, "R={r} column {i}: {err}");
            }
        }
    }
}

#[test]
fn linf_inverse_norm_at_radius_one() {
    let g = f2();
    let m = op(&g, 1);
    let dense = dense_linf_norm(&dense_inverse(&dense_from_group(m.ball(), &standard(&g))));
    assert!((dense - 8.0 / 3.0).abs() < 1e-12, "{dense}");
    let rep = inverse_lp_norms(&m, &InverseOptions::default()).unwrap();
    assert!((rep.linf_inv_norm - 8.0 / 3.0).abs() < 1e-10);
    assert_eq!(rep.l1_inv_norm, rep.linf_inv_norm);
}

#[test]
fn linf_norm_cross_checked_by_single_solve() {
    // (I - M)^-1 has nonnegative entries (Neumann series), so the largest row
    // sum equals max((I - M)^-1 1).
    for r in 1..=5 {
        let m = op(&f2(), r);
        let ones = vec![1.0; m.dim()];
        let sol = solve_shifted(&m, &ones, &CgOptions::with_tol(1e-12)).unwrap();
        let single = sol.x.iter().cloned().fold(0.0, f64::max);
        let cols = inverse_column_l1_norms(&m, &CgOptions::with_tol(1e-12)).unwrap();
        let by_columns = cols.iter().map(|c| c.0).fold(0.0, f64::max);
        assert!((single - by_columns).abs() < 1e-8, "R={r}: {single} vs {by_columns}");
    }
}

#[test]
fn inverse_norms_respect_budget() {
    let m = op(&f2(), 9);
    match inverse_lp_norms(&m, &InverseOptions::default()) {
        Err(Error::Capacity { needed, .. }) => assert_eq!(needed, m.dim().to_string()),
        other => panic!("expected a capacity error, got {other:?}"),
    }
}

#[test]
fn single_precision_eigenvalue() {
    let m: OperatorF32 = build_operator(&standard(&f2()), 5, DEFAULT_NODE_BUDGET).unwrap();
    let opts = PowerOptions {
        tol: 1e-6,
        ..Default::default()
    };
    let rep = top_eigenvalue(&m, &opts).unwrap();
    let want = top_eigenvalue(&op(&f2(), 5), &PowerOptions::default()).unwrap().lambda_max;
    assert!((rep.lambda_max - want).abs() < 1e-4);
}

#[test]
fn eigenvalue_is_seed_independent_and_reproducible() {
    let m = op(&z2(), 10);
    let a = top_eigenvalue(&m, &PowerOptions::default()).unwrap();
    let b = top_eigenvalue(&m, &PowerOptions::default()).unwrap();
    assert_eq!(a, b);
    let c = top_eigenvalue(&m, &PowerOptions { seed: 99, ..Default::default() }).unwrap();
    assert!((a.lambda_max - c.lambda_max).abs() < 1e-8);
}
