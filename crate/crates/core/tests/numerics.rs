mod common;

use proptest::prelude::*;
use regstab::ingest::IndexKind;
use regstab::numerics::{
    correlation_matrix, pearson, standardize, symmetric_eigen, DataMatrix, Matrix,
};

use common::*;

fn col_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn col_var(v: &[f64]) -> f64 {
    let m = col_mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

#[test]
fn sudan_lap_standardized_against_frozen_values() {
    // computed outside the crate: mean 257.25, sample sd over n - 1
    let expected = [
        -1.766063400082332,
        1.233825115126013,
        0.7499721288020862,
        1.0402839205964423,
        0.07257794794858899,
        -0.4112750383753376,
        -0.7015868301696936,
        -0.21773384384576697,
    ];
    let recs = table("sudan.csv");
    let x = regstab::ingest::index_matrix(&recs, &[IndexKind::Lap]).unwrap();
    let (z, stats) = standardize(&x).unwrap();
    assert_eq!(stats.means[0], 257.25);
    for (a, e) in z.column(0).iter().zip(expected) {
        assert!((a - e).abs() < 1e-12, "{a} vs {e}");
    }
}

/// Naive double loop over standardized columns, divisor n - 1.
fn brute_force_correlation(x: &DataMatrix) -> Matrix {
    let (n, p) = x.values().shape();
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let c = x.column(j);
            let (m, s) = (col_mean(&c), col_var(&c).sqrt());
            c.iter().map(|v| (v - m) / s).collect()
        })
        .collect();
    let mut r = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..n {
                acc += cols[i][k] * cols[j][k];
            }
            r[(i, j)] = acc / (n as f64 - 1.0);
        }
    }
    r
}

#[test]
fn correlation_of_table_fixture_matches_brute_force() {
    // five indexes plus year and printed RS: seven columns over 24 rows
    let recs = country_series();
    let rows: Vec<Vec<f64>> = recs
        .iter()
        .map(|r| {
            let mut v = r.network_inputs();
            v.push(r.year as f64);
            v.push(r.rs.unwrap());
            v
        })
        .collect();
    let names = ["LAP", "AAT", "FO", "AMS", "PSR", "YEAR", "RS"].map(String::from).to_vec();
    let x = DataMatrix::unitless(Matrix::from_rows(&rows).unwrap(), names).unwrap();
    let (z, _) = standardize(&x).unwrap();
    let r = correlation_matrix(&z).unwrap();
    let oracle = brute_force_correlation(&x);
    for i in 0..7 {
        assert_eq!(r[(i, i)], 1.0);
        for j in 0..7 {
            assert_eq!(r[(i, j)], r[(j, i)]);
            assert!((r[(i, j)] - oracle[(i, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn random_symmetric_reconstruction() {
    let r = random_symmetric(5, 2024);
    let e = symmetric_eigen(&r).unwrap();
    let back = e.reconstruct();
    for i in 0..5 {
        for j in 0..5 {
            assert!((back[(i, j)] - r[(i, j)]).abs() < 1e-8);
        }
    }
}

#[test]
fn year_rs_correlations_reproduce_published_values() {
    let r = [
        pearson(&YEARS, &SUDAN_RS).unwrap(),
        pearson(&YEARS, &HAITI_RS).unwrap(),
        pearson(&YEARS, &SOMALIA_RS).unwrap(),
    ];
    for (got, want) in r.iter().zip([-0.8265, -0.8689, 0.9547]) {
        assert!((got - want).abs() <= 0.0005, "{got} vs {want}");
    }
}

fn eigen_checks(m: &Matrix) {
    let e = symmetric_eigen(m).unwrap();
    let n = m.rows();
    assert!((e.eigenvalues.iter().sum::<f64>() - m.trace()).abs() < 1e-8);
    for w in e.eigenvalues.windows(2) {
        assert!(w[0] >= w[1]);
    }
    for i in 0..n {
        let v = e.eigenvector(i);
        let rv = m.mat_vec(&v).unwrap();
        let resid: f64 =
            rv.iter().zip(&v).map(|(a, b)| (a - e.eigenvalues[i] * b).powi(2)).sum::<f64>().sqrt();
        assert!(resid < 1e-8, "residual {resid}");
        let pivot = v.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        assert!(pivot > 0.0);
        for j in 0..n {
            let d: f64 = v.iter().zip(e.eigenvector(j)).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn standardized_columns_have_zero_mean_unit_variance(
        n in 3usize..40, p in 1usize..6, seed in any::<u64>(), scale in 1e-3f64..1e4, shift in -1e4f64..1e4
    ) {
        let raw = random_matrix(n, p, -1.0, 1.0, seed);
        let data: Vec<f64> = raw.as_slice().iter().map(|v| shift + scale * v).collect();
        let x = DataMatrix::unitless(
            Matrix::from_vec(n, p, data).unwrap(),
            (0..p).map(|j| format!("c{j}")).collect(),
        ).unwrap();
        let (z, _) = standardize(&x).unwrap();
        for j in 0..p {
            let c = z.column(j);
            prop_assert!(col_mean(&c).abs() < 1e-12);
            prop_assert!((col_var(&c) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn correlation_matrix_is_psd(n in 3usize..30, p in 1usize..8, seed in any::<u64>()) {
        let x = DataMatrix::unitless(
            random_matrix(n, p, -1.0, 1.0, seed),
            (0..p).map(|j| format!("c{j}")).collect(),
        ).unwrap();
        let r = correlation_matrix(&x).unwrap();
        for i in 0..p {
            prop_assert_eq!(r[(i, i)], 1.0);
            for j in 0..p {
                prop_assert!(r[(i, j)].abs() <= 1.0 + 1e-12);
            }
        }
        let e = symmetric_eigen(&r).unwrap();
        prop_assert!(*e.eigenvalues.last().unwrap() >= -1e-10);
    }

    #[test]
    fn eigen_invariants_hold(n in 1usize..11, seed in any::<u64>()) {
        eigen_checks(&random_symmetric(n, seed));
    }

    #[test]
    fn pearson_affine_invariance(
        n in 3usize..30, seed in any::<u64>(), a in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0], b in -100.0f64..100.0
    ) {
        let m = random_matrix(n, 2, -1.0, 1.0, seed);
        let (x, y) = (m.column(0), m.column(1));
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let base = pearson(&x, &y).unwrap();
        prop_assert!((pearson(&ax, &y).unwrap() - a.signum() * base).abs() < 1e-12);
        prop_assert!((pearson(&y, &x).unwrap() - base).abs() < 1e-15);
    }
}
