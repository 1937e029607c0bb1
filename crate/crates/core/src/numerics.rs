//! Dense matrices, column standardization, correlation and the symmetric
//! eigensolver that the PCA stage is built on.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch { left: self.cols, right: x.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|a_ij - a_ji|`, or an error for non-square input.
    pub fn max_asymmetry(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                self.rows, self.cols
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        Ok(worst)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with divisor `n - 1`.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Measurement unit attached to a data column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Millimetre,
    Celsius,
    Percent,
    Dimensionless,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Millimetre => "mm",
            Unit::Celsius => "°C",
            Unit::Percent => "%",
            Unit::Dimensionless => "-",
        })
    }
}

/// An `n x p` observation matrix: one row per observation, one named column
/// per index.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Matrix,
    column_names: Vec<String>,
    column_units: Vec<Unit>,
}

impl DataMatrix {
    /// Validates shape (`n >= 2`, `p >= 1`), finiteness and unique column names.
    pub fn new(values: Matrix, column_names: Vec<String>, column_units: Vec<Unit>) -> Result<Self> {
        let (n, p) = values.shape();
        if n < 2 || p < 1 {
            return Err(Error::InvalidMatrix(format!(
                "need at least 2 rows and 1 column, got {n}x{p}"
            )));
        }
        if column_names.len() != p || column_units.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{p} columns but {} names and {} units",
                column_names.len(),
                column_units.len()
            )));
        }
        for i in 0..n {
            for j in 0..p {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, column: j });
                }
            }
        }
        for (j, name) in column_names.iter().enumerate() {
            if column_names[..j].contains(name) {
                return Err(Error::InvalidMatrix(format!("duplicate column name `{name}`")));
            }
        }
        Ok(Self { values, column_names, column_units })
    }

    /// Convenience constructor with every column dimensionless.
    pub fn unitless(values: Matrix, column_names: Vec<String>) -> Result<Self> {
        let p = values.cols();
        Self::new(values, column_names, vec![Unit::Dimensionless; p])
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_units(&self) -> &[Unit] {
        &self.column_units
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.cols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// New matrix holding only the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<DataMatrix> {
        let cols: Vec<Vec<f64>> = indices.iter().map(|&j| self.column(j)).collect();
        DataMatrix::new(
            Matrix::from_columns(&cols)?,
            indices.iter().map(|&j| self.column_names[j].clone()).collect(),
            indices.iter().map(|&j| self.column_units[j]).collect(),
        )
    }
}

/// Per-column mean and sample variance.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub sample_variances: Vec<f64>,
}

impl ColumnStats {
    pub fn of(x: &DataMatrix) -> Self {
        let (means, sample_variances) = (0..x.n_cols())
            .map(|j| {
                let c = x.column(j);
                (mean(&c), sample_variance(&c))
            })
            .unzip();
        Self { means, sample_variances }
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.sample_variances.iter().map(|v| v.sqrt()).collect()
    }

    /// Applies `(x - mean) / sd` to a single observation.
    pub fn standardize_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.means.len() {
            return Err(Error::LengthMismatch { left: self.means.len(), right: row.len() });
        }
        Ok(row
            .iter()
            .zip(&self.means)
            .zip(&self.sample_variances)
            .map(|((x, m), v)| (x - m) / v.sqrt())
            .collect())
    }
}

/// Centres every column and scales it to unit sample variance.
pub fn standardize(x: &DataMatrix) -> Result<(DataMatrix, ColumnStats)> {
    let (n, p) = x.values().shape();
    for i in 0..n {
        for j in 0..p {
            if !x.values()[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, column: j });
            }
        }
    }
    let stats = ColumnStats::of(x);
    for (j, v) in stats.sample_variances.iter().enumerate() {
        if *v <= 0.0 || !v.is_finite() {
            return Err(Error::ZeroVariance(x.column_names()[j].clone()));
        }
    }
    let sds = stats.std_devs();
    let mut z = x.values().clone();
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = (z[(i, j)] - stats.means[j]) / sds[j];
        }
    }
    let z = DataMatrix::new(z, x.column_names().to_vec(), vec![Unit::Dimensionless; p])?;
    Ok((z, stats))
}

/// Pearson product-moment correlation of two equally long sequences.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation matrix of the columns of `z`.
///
/// Entries are Pearson coefficients of column pairs, so the diagonal is
/// exactly 1 whether or not `z` was standardized first.
pub fn correlation_matrix(z: &DataMatrix) -> Result<Matrix> {
    let p = z.n_cols();
    if p == 0 || z.n_rows() == 0 {
        return Err(Error::DimensionMismatch("empty data matrix".into()));
    }
    let cols: Vec<Vec<f64>> = (0..p).map(|j| z.column(j)).collect();
    let mut r = Matrix::identity(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let rij = pearson(&cols[i], &cols[j]).map_err(|e| match e {
                Error::ZeroVariance(which) => {
                    let col = if which == "x" { i } else { j };
                    Error::ZeroVariance(z.column_names()[col].clone())
                }
                other => other,
            })?;
            r[(i, j)] = rij;
            r[(j, i)] = rij;
        }
    }
    Ok(r)
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let lambda = self.eigenvalues[k];
            for i in 0..n {
                let vik = self.eigenvectors[(i, k)] * lambda;
                for j in 0..n {
                    out[(i, j)] += vik * self.eigenvectors[(j, k)];
                }
            }
        }
        out
    }
}

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over every upper-triangular pair until the off-diagonal Frobenius
/// norm falls below `1e-12` (relative to `max(1, ||R||_F)`). Eigenvalues come
/// back in descending order with ties kept in original diagonal order, and
/// each eigenvector is signed so its largest-magnitude entry is positive.
pub fn symmetric_eigen(r: &Matrix) -> Result<SymmetricEigen> {
    let asym = r.max_asymmetry()?;
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    if !r.is_finite() {
        return Err(Error::NonFinite { row: 0, column: 0 });
    }
    let n = r.rows();
    // symmetrize to kill round-off below the tolerance
    let mut a = r.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let tol = JACOBI_TOLERANCE * r.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off < tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                // A <- J^T A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep ascending index order
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("finite eigenvalues"));

    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let pivot = col
            .iter()
            .enumerate()
            .fold(0, |best, (k, x)| if x.abs() > col[best].abs() { k } else { best });
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, x) in col.into_iter().enumerate() {
            eigenvectors[(i, dst)] = x;
        }
    }
    Ok(SymmetricEigen { eigenvalues, eigenvectors, sweeps })
}
