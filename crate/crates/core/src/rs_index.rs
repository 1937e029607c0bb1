//! Region Stability index: `RS = 100 / BPNN(x) - 1`, where `BPNN(x)` is the
//! network output on the 0-100 label scale.

use std::fmt;

use crate::error::{Error, Result};

pub const FRAGILE_BELOW: f64 = 0.25;
pub const STABLE_FROM: f64 = 1.0;

/// Default raw label range: twelve indicators scored 0-10.
pub const DEFAULT_LABEL_RANGE: (f64, f64) = (0.0, 120.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Fragile,
    Vulnerable,
    Stable,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Fragile => "fragile",
            Category::Vulnerable => "vulnerable",
            Category::Stable => "stable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsScore {
    pub value: f64,
    pub category: Category,
    /// Network output (0-100 scale) that produced the score, if any.
    pub bpnn_output: Option<f64>,
}

impl RsScore {
    /// Wraps an RS value that did not come from a network output.
    pub fn from_value(value: f64) -> Self {
        Self { value, category: classify(value), bpnn_output: None }
    }
}

/// Boundaries go to the less fragile class: 0.25 is vulnerable, 1 is stable.
pub fn classify(rs: f64) -> Category {
    if rs < FRAGILE_BELOW {
        Category::Fragile
    } else if rs < STABLE_FROM {
        Category::Vulnerable
    } else {
        Category::Stable
    }
}

pub fn rs_transform(bpnn_output: f64) -> Result<RsScore> {
    if !(bpnn_output > 0.0) || !bpnn_output.is_finite() {
        return Err(Error::NonPositiveOutput(bpnn_output));
    }
    let value = 100.0 / bpnn_output - 1.0;
    Ok(RsScore { value, category: classify(value), bpnn_output: Some(bpnn_output) })
}

/// Maps a sigmoid output in (0, 1) to the 0-100 scale and scores it.
pub fn rs_from_sigmoid(y: f64) -> Result<RsScore> {
    rs_transform(100.0 * y)
}

/// Min-max maps raw labels onto `[0, 100]`.
pub fn normalize_labels(raw: &[f64], raw_min: f64, raw_max: f64) -> Result<Vec<f64>> {
    if !(raw_max > raw_min) || !raw_min.is_finite() || !raw_max.is_finite() {
        return Err(Error::DegenerateRange { min: raw_min, max: raw_max });
    }
    raw.iter()
        .map(|&v| {
            if !(raw_min..=raw_max).contains(&v) {
                return Err(Error::OutOfRange { value: v, min: raw_min, max: raw_max });
            }
            Ok((v - raw_min) / (raw_max - raw_min) * 100.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_correspondences_are_exact() {
        let a = rs_transform(80.0).unwrap();
        assert_eq!(a.value, 0.25);
        assert_eq!(a.category, Category::Vulnerable);
        let b = rs_transform(50.0).unwrap();
        assert_eq!(b.value, 1.0);
        assert_eq!(b.category, Category::Stable);
        assert_eq!(rs_transform(100.0).unwrap().value, 0.0);
    }

    #[test]
    fn nonpositive_output_is_rejected() {
        assert!(matches!(rs_transform(0.0), Err(Error::NonPositiveOutput(_))));
        assert!(matches!(rs_transform(-3.0), Err(Error::NonPositiveOutput(_))));
        assert!(rs_transform(f64::NAN).is_err());
    }

    #[test]
    fn classify_printed_scores() {
        assert_eq!(classify(-0.0825), Category::Fragile);
        assert_eq!(classify(-0.036), Category::Fragile);
        assert_eq!(classify(0.2499), Category::Fragile);
        assert_eq!(classify(0.25), Category::Vulnerable);
        assert_eq!(classify(0.9999), Category::Vulnerable);
        assert_eq!(classify(1.0), Category::Stable);
    }

    #[test]
    fn label_normalization() {
        let v = normalize_labels(&[120.0, 60.0, 96.0, 0.0], 0.0, 120.0).unwrap();
        assert_eq!(v, vec![100.0, 50.0, 80.0, 0.0]);
        assert!(matches!(normalize_labels(&[1.0], 5.0, 5.0), Err(Error::DegenerateRange { .. })));
        assert!(matches!(normalize_labels(&[121.0], 0.0, 120.0), Err(Error::OutOfRange { .. })));
    }
}
