//! Least-squares trend of a yearly series, the correlation gate applied
//! before trusting it, and extrapolation.

use crate::error::{Error, Result};
use crate::numerics::pearson;

pub const DEFAULT_MIN_ABS_R: f64 = 0.8;
pub const DEFAULT_HORIZON: usize = 5;
const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    points: Vec<(i32, f64)>,
}

impl TimeSeries {
    /// Years must be strictly increasing and values finite.
    pub fn new(points: Vec<(i32, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::DegenerateYears);
        }
        if let Some(i) = points.iter().position(|p| !p.1.is_finite()) {
            return Err(Error::NonFinite { row: i, column: 1 });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn years(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0 as f64).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn last_year(&self) -> Option<i32> {
        self.points.last().map(|p| p.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    /// Value at year 0.
    pub intercept: f64,
    pub r: f64,
    pub residuals: Vec<f64>,
    pub mean_year: f64,
    pub mean_value: f64,
}

impl LinearFit {
    pub fn value_at(&self, year: f64) -> f64 {
        // evaluated around the centroid to keep precision far from year 0
        self.mean_value + self.slope * (year - self.mean_year)
    }
}

/// Closed-form OLS of value on year. Years are centred before solving.
pub fn fit(series: &TimeSeries) -> Result<LinearFit> {
    if series.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, got: series.len() });
    }
    let xs = series.years();
    let ys = series.values();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateYears);
    }
    let slope = sxy / sxx;
    let residuals: Vec<f64> =
        xs.iter().zip(&ys).map(|(x, y)| y - (my + slope * (x - mx))).collect();
    // a constant series is a perfect (flat) fit with undefined correlation
    let r = match pearson(&xs, &ys) {
        Ok(r) => r,
        Err(Error::ZeroVariance(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(LinearFit { slope, intercept: my - slope * mx, r, residuals, mean_year: mx, mean_value: my })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativityCheck {
    pub r: f64,
    pub pass: bool,
}

/// Pearson correlation of year against value; passes when `|r| >= min_abs_r`.
/// A constant series has r = 0 and fails.
pub fn relativity_check(series: &TimeSeries, min_abs_r: f64) -> Result<RelativityCheck> {
    let r = match pearson(&series.years(), &series.values()) {
        Ok(r) => r,
        Err(Error::ZeroVariance(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(RelativityCheck { r, pass: r.abs() >= min_abs_r })
}

pub fn predict(fit: &LinearFit, years: &[i32]) -> Vec<(i32, f64)> {
    years.iter().map(|&y| (y, fit.value_at(y as f64))).collect()
}

/// The `horizon` years following `last_year`.
pub fn horizon_after(last_year: i32, horizon: usize) -> Vec<i32> {
    (1..=horizon as i32).map(|h| last_year + h).collect()
}
