#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regstab::bpnn::{forward, Network, NetworkConfig};
use regstab::ingest::{self, CountryYearRecord};
use regstab::numerics::{DataMatrix, Matrix, Unit};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn table(name: &str) -> Vec<CountryYearRecord> {
    ingest::load_csv(data_path(name)).unwrap()
}

pub fn country_series() -> Vec<CountryYearRecord> {
    ingest::load_many(&[data_path("sudan.csv"), data_path("haiti.csv"), data_path("somalia.csv")])
        .unwrap()
}

pub const YEARS: [f64; 8] = [2010., 2011., 2012., 2013., 2014., 2015., 2016., 2017.];
pub const SUDAN_RS: [f64; 8] = [-0.0825, -0.08, -0.0830, -0.0835, -0.0973, -0.0875, -0.102, -0.127];
pub const HAITI_RS: [f64; 8] = [-0.0354, -0.037, -0.0362, -0.0378, -0.036, -0.0388, -0.040, -0.042];
pub const SOMALIA_RS: [f64; 8] = [-0.056, -0.057, -0.043, -0.044, -0.042, -0.039, -0.032, -0.030];

pub const PUBLISHED_EIGENVALUES: [f64; 7] = [3.7366, 1.8172, 1.2306, 1.1533, 0.7351, 0.3561, 0.0533];
pub const PUBLISHED_CR_PCT: [f64; 7] = [41.14, 20.01, 13.55, 12.70, 8.090, 3.920, 0.590];
pub const PUBLISHED_ACC_PCT: [f64; 7] = [41.14, 61.15, 74.70, 87.40, 95.49, 99.41, 100.00];

/// Seven named indexes: five independent columns plus two near-copies
/// (DO tracks FO, LL tracks AMS), so the spectrum is roughly
/// [2, 2, 1, 1, 1, ~0, ~0] and 95% needs exactly five components.
pub fn seven_index_fixture(n: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut col = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let lap = col();
    let aat = col();
    let fo = col();
    let ams = col();
    let psr = col();
    let noise_a = col();
    let noise_b = col();
    let do_: Vec<f64> = fo.iter().zip(&noise_a).map(|(f, e)| f + 0.02 * e).collect();
    let ll: Vec<f64> = ams.iter().zip(&noise_b).map(|(a, e)| a + 0.02 * e).collect();
    // shift/scale into plausible units
    let lap: Vec<f64> = lap.iter().map(|v| 1000.0 + 400.0 * v).collect();
    let aat: Vec<f64> = aat.iter().map(|v| 25.0 + 3.0 * v).collect();
    let cols = vec![lap, aat, fo, do_, ams, ll, psr];
    DataMatrix::new(
        Matrix::from_columns(&cols).unwrap(),
        ["LAP", "AAT", "FO", "DO", "AMS", "LL", "PSR"].iter().map(|s| s.to_string()).collect(),
        vec![
            Unit::Millimetre,
            Unit::Celsius,
            Unit::Dimensionless,
            Unit::Dimensionless,
            Unit::Percent,
            Unit::Dimensionless,
            Unit::Percent,
        ],
    )
    .unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Teacher network: default initialization scaled by `gain`.
pub fn teacher(seed: u64, gain: f64) -> Network {
    let mut net = Network::random(&NetworkConfig { seed, ..Default::default() });
    let p: Vec<f64> = net.parameters().iter().map(|v| v * gain).collect();
    net.set_parameters(&p).unwrap();
    net
}

/// `n` inputs uniform in [-2, 2]^5 labelled by `teacher`.
pub fn teacher_dataset(teacher: &Network, n: usize, seed: u64) -> (Matrix, Matrix) {
    let x = random_matrix(n, teacher.n_input(), -2.0, 2.0, seed);
    let y: Vec<f64> = (0..n).flat_map(|i| forward(teacher, x.row(i)).unwrap().output).collect();
    (x, Matrix::from_vec(n, teacher.n_output(), y).unwrap())
}
