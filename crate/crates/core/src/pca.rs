//! Correlation-matrix PCA with contribution-rate component selection.
//!
//! How the selected components turn into a reduced data matrix is a
//! [`Reduction`] strategy. Two ship with the crate and are looked up by name
//! through a [`ReductionRegistry`]:
//!
//! - `index-selection` keeps the `k` original columns attributed to the
//!   leading components (the named indexes fed to the network downstream);
//! - `projection` projects the standardized data onto the first `k`
//!   eigenvectors.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{
    correlation_matrix, standardize, symmetric_eigen, DataMatrix, Matrix, SymmetricEigen, Unit,
};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// `Cr_i = lambda_i / sum(lambda)` and its running prefix sum.
pub fn contribution_rates(eigenvalues: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(&neg) = eigenvalues.iter().find(|&&l| l < -NEGATIVE_EIGENVALUE_TOLERANCE) {
        return Err(Error::NegativeEigenvalue(neg));
    }
    // tiny negatives are round-off on a PSD matrix
    let clipped: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    let rates: Vec<f64> = clipped.iter().map(|l| l / total).collect();
    let accumulated = rates
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    Ok((rates, accumulated))
}

/// Smallest `k` with `accumulated[k - 1] >= threshold`.
pub fn select_components(accumulated: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!("threshold {threshold} not in (0, 1]")));
    }
    // the final prefix sum can land a few ulps under 1
    let slack = 1e-12;
    accumulated
        .iter()
        .position(|&a| a >= threshold - slack)
        .map(|i| i + 1)
        .ok_or(Error::ThresholdUnreachable(threshold))
}

/// Orders the original columns by the component they are attributed to.
///
/// Component `i` (in descending eigenvalue order) claims the not-yet-claimed
/// column with the largest absolute loading; ties go to the lower column
/// index. The result is a permutation of `0..p`.
pub fn attribute_indexes(eigenvectors: &Matrix) -> Vec<usize> {
    let p = eigenvectors.rows();
    let mut claimed = vec![false; p];
    let mut ranking = Vec::with_capacity(p);
    for comp in 0..eigenvectors.cols().min(p) {
        let mut best: Option<usize> = None;
        for row in 0..p {
            if claimed[row] {
                continue;
            }
            let w = eigenvectors[(row, comp)].abs();
            if best.is_none_or(|b| w > eigenvectors[(b, comp)].abs()) {
                best = Some(row);
            }
        }
        if let Some(b) = best {
            claimed[b] = true;
            ranking.push(b);
        }
    }
    ranking
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Original column name attributed to each component, in component order.
    pub index_names: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub contribution_rates: Vec<f64>,
    pub accumulated_rates: Vec<f64>,
    pub threshold: f64,
    pub selected_k: usize,
    /// First `selected_k` entries of `index_names`.
    pub selected_indexes: Vec<String>,
    /// Eigenvectors as columns, in the original column order. Absent when the
    /// result was built from supplied eigenvalues alone.
    pub loadings: Option<Matrix>,
}

impl PcaResult {
    /// Builds the contribution table from eigenvalues that are already
    /// attributed to named indexes (e.g. a published eigenvalue table).
    ///
    /// Rows are sorted by descending eigenvalue, keeping input order on ties.
    pub fn from_eigenvalues(named: &[(String, f64)], threshold: f64) -> Result<Self> {
        if named.is_empty() {
            return Err(Error::AllZero);
        }
        let mut rows = named.to_vec();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let eigenvalues: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let (contribution_rates, accumulated_rates) = contribution_rates(&eigenvalues)?;
        let selected_k = select_components(&accumulated_rates, threshold)?;
        let index_names: Vec<String> = rows.into_iter().map(|r| r.0).collect();
        Ok(Self {
            selected_indexes: index_names[..selected_k].to_vec(),
            index_names,
            eigenvalues,
            contribution_rates,
            accumulated_rates,
            threshold,
            selected_k,
            loadings: None,
        })
    }
}

/// Everything a [`Reduction`] may look at.
pub struct ReductionInput<'a> {
    pub original: &'a DataMatrix,
    pub standardized: &'a DataMatrix,
    pub eigen: &'a SymmetricEigen,
    /// Column indexes of `original`, ranked by attributed component.
    pub ranking: &'a [usize],
    pub k: usize,
}

/// Strategy that turns a PCA decomposition into a reduced data matrix.
pub trait Reduction: Send + Sync {
    fn name(&self) -> &'static str;

    fn reduce(&self, input: &ReductionInput<'_>) -> Result<DataMatrix>;
}

/// Keeps the top-`k` attributed original columns, with their raw values.
#[derive(Debug, Default, Clone, Copy)]
pub struct IndexSelection;

impl Reduction for IndexSelection {
    fn name(&self) -> &'static str {
        "index-selection"
    }

    fn reduce(&self, input: &ReductionInput<'_>) -> Result<DataMatrix> {
        input.original.select_columns(&input.ranking[..input.k])
    }
}

/// Scores on the first `k` principal axes: `Z V_k`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Projection;

impl Reduction for Projection {
    fn name(&self) -> &'static str {
        "projection"
    }

    fn reduce(&self, input: &ReductionInput<'_>) -> Result<DataMatrix> {
        let p = input.eigen.eigenvectors.rows();
        let mut vk = Matrix::zeros(p, input.k);
        for i in 0..p {
            for j in 0..input.k {
                vk[(i, j)] = input.eigen.eigenvectors[(i, j)];
            }
        }
        let scores = input.standardized.values().matmul(&vk)?;
        DataMatrix::new(
            scores,
            (1..=input.k).map(|i| format!("PC{i}")).collect(),
            vec![Unit::Dimensionless; input.k],
        )
    }
}

/// Name-keyed collection of reduction strategies.
pub struct ReductionRegistry {
    entries: Vec<Box<dyn Reduction>>,
}

impl ReductionRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// `index-selection` (the default) and `projection`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(IndexSelection));
        r.register(Box::new(Projection));
        r
    }

    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, strategy: Box<dyn Reduction>) {
        self.entries.retain(|e| e.name() != strategy.name());
        self.entries.push(strategy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Reduction> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownReduction(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

impl Default for ReductionRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for ReductionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[derive(Debug, Clone)]
pub struct PcaOutput {
    pub result: PcaResult,
    pub reduced: DataMatrix,
}

/// standardize -> correlation -> eigen -> contribution rates -> selection,
/// then hands the decomposition to `reduction`.
pub fn run_pca(x: &DataMatrix, threshold: f64, reduction: &dyn Reduction) -> Result<PcaOutput> {
    let (z, _) = standardize(x)?;
    let r = correlation_matrix(&z)?;
    let eigen = symmetric_eigen(&r)?;
    let (rates, accumulated) = contribution_rates(&eigen.eigenvalues)?;
    let k = select_components(&accumulated, threshold)?;
    let ranking = attribute_indexes(&eigen.eigenvectors);
    let reduced = reduction.reduce(&ReductionInput {
        original: x,
        standardized: &z,
        eigen: &eigen,
        ranking: &ranking,
        k,
    })?;
    let index_names: Vec<String> =
        ranking.iter().map(|&j| x.column_names()[j].clone()).collect();
    let result = PcaResult {
        selected_indexes: index_names[..k].to_vec(),
        index_names,
        eigenvalues: eigen.eigenvalues.clone(),
        contribution_rates: rates,
        accumulated_rates: accumulated,
        threshold,
        selected_k: k,
        loadings: Some(eigen.eigenvectors),
    };
    Ok(PcaOutput { result, reduced })
}
