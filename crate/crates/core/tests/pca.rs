mod common;

use proptest::prelude::*;
use regstab::numerics::{sample_variance, standardize, Matrix};
use regstab::pca::{
    contribution_rates, run_pca, select_components, IndexSelection, Projection, ReductionRegistry,
};

use common::*;

#[test]
fn published_contribution_rates() {
    let (cr, acc) = contribution_rates(&PUBLISHED_EIGENVALUES).unwrap();
    for i in 0..7 {
        assert!((100.0 * cr[i] - PUBLISHED_CR_PCT[i]).abs() <= 0.01, "Cr[{i}] = {}", 100.0 * cr[i]);
        assert!((100.0 * acc[i] - PUBLISHED_ACC_PCT[i]).abs() <= 0.01, "acc[{i}] = {}", 100.0 * acc[i]);
    }
    assert!((cr.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    assert!((acc[6] - 1.0).abs() < 1e-10);
    assert_eq!(select_components(&acc, 0.95).unwrap(), 5);
}

#[test]
fn seven_index_fixture_keeps_five_named_columns() {
    let x = seven_index_fixture(300, 17);
    let out = run_pca(&x, 0.95, &IndexSelection).unwrap();
    assert_eq!(out.result.selected_k, 5);
    assert_eq!(out.reduced.n_cols(), 5);
    assert_eq!(out.reduced.column_names(), out.result.selected_indexes.as_slice());
    // each near-duplicate pair contributes one member only
    let sel = &out.result.selected_indexes;
    assert!(!(sel.contains(&"FO".to_string()) && sel.contains(&"DO".to_string())));
    assert!(!(sel.contains(&"AMS".to_string()) && sel.contains(&"LL".to_string())));
    // raw values carried through untouched
    let j = x.column_index(&sel[0]).unwrap();
    assert_eq!(out.reduced.column(0), x.column(j));
}

#[test]
fn projection_matches_naive_product() {
    let x = regstab::numerics::DataMatrix::unitless(
        random_matrix(40, 4, -3.0, 3.0, 8),
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
    )
    .unwrap();
    let out = run_pca(&x, 0.9, &Projection).unwrap();
    let k = out.result.selected_k;
    let v = out.result.loadings.as_ref().unwrap();
    let (z, _) = standardize(&x).unwrap();
    for i in 0..40 {
        for c in 0..k {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += z.values()[(i, j)] * v[(j, c)];
            }
            assert!((out.reduced.values()[(i, c)] - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn fixture_run_is_deterministic() {
    let x = seven_index_fixture(120, 3);
    let a = run_pca(&x, 0.95, &IndexSelection).unwrap();
    let b = run_pca(&x, 0.95, &IndexSelection).unwrap();
    assert_eq!(a.result, b.result);
    let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(a.result.loadings.as_ref().unwrap()), bits(b.result.loadings.as_ref().unwrap()));
}

#[test]
fn registry_selects_strategy_by_name() {
    let x = seven_index_fixture(80, 5);
    let reg = ReductionRegistry::default();
    let proj = run_pca(&x, 0.95, reg.get("projection").unwrap()).unwrap();
    assert_eq!(proj.reduced.column_names()[0], "PC1");
    let sel = run_pca(&x, 0.95, reg.get("index-selection").unwrap()).unwrap();
    assert_eq!(sel.result.selected_k, proj.result.selected_k);
}

proptest! {
    #[test]
    fn contribution_rates_scale_invariant(
        lambdas in prop::collection::vec(0.0f64..10.0, 1..10), c in 1e-6f64..1e6
    ) {
        prop_assume!(lambdas.iter().sum::<f64>() > 1e-6);
        let (a, acc) = contribution_rates(&lambdas).unwrap();
        let scaled: Vec<f64> = lambdas.iter().map(|l| l * c).collect();
        let (b, _) = contribution_rates(&scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((acc.last().unwrap() - 1.0).abs() < 1e-10);
        for w in acc.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn selection_is_minimal_and_monotone(
        lambdas in prop::collection::vec(0.01f64..10.0, 1..10), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0
    ) {
        let (_, acc) = contribution_rates(&lambdas).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let k_lo = select_components(&acc, lo).unwrap();
        let k_hi = select_components(&acc, hi).unwrap();
        prop_assert!(k_hi >= k_lo);
        prop_assert!(acc[k_lo - 1] >= lo - 1e-12);
        if k_lo > 1 {
            prop_assert!(acc[k_lo - 2] < lo);
        }
    }

    #[test]
    fn projected_variance_equals_eigenvalue(n in 10usize..60, p in 2usize..6, seed in any::<u64>()) {
        let x = regstab::numerics::DataMatrix::unitless(
            random_matrix(n, p, -1.0, 1.0, seed),
            (0..p).map(|j| format!("c{j}")).collect(),
        ).unwrap();
        let out = run_pca(&x, 1.0, &Projection).unwrap();
        for i in 0..out.result.selected_k {
            let v = sample_variance(&out.reduced.column(i));
            prop_assert!((v - out.result.eigenvalues[i]).abs() < 1e-6);
        }
    }
}
