//! Pipeline settings and the flat `key = value` config file.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error so typos do not silently fall back to defaults.

use std::path::Path;

use crate::bpnn::NetworkConfig;
use crate::error::{Error, Result};
use crate::forecast::{DEFAULT_HORIZON, DEFAULT_MIN_ABS_R};
use crate::ingest::DEFAULT_OUTLIER_CUTOFF;
use crate::pca::DEFAULT_THRESHOLD;
use crate::rs_index::DEFAULT_LABEL_RANGE;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub pca_threshold: f64,
    /// Name of a registered reduction strategy.
    pub pca_mode: String,
    pub outlier_z_cutoff: f64,
    pub drop_outliers: bool,
    pub network: NetworkConfig,
    pub label_range: (f64, f64),
    pub forecast_horizon: usize,
    pub relativity_min_abs_r: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pca_threshold: DEFAULT_THRESHOLD,
            pca_mode: "index-selection".to_string(),
            outlier_z_cutoff: DEFAULT_OUTLIER_CUTOFF,
            drop_outliers: false,
            network: NetworkConfig::default(),
            label_range: DEFAULT_LABEL_RANGE,
            forecast_horizon: DEFAULT_HORIZON,
            relativity_min_abs_r: DEFAULT_MIN_ABS_R,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::Config { line: 0, reason });
        if !(self.pca_threshold > 0.0 && self.pca_threshold <= 1.0) {
            return bad(format!("pca_threshold {} not in (0, 1]", self.pca_threshold));
        }
        if !(self.outlier_z_cutoff > 0.0) {
            return bad(format!("outlier_z_cutoff {} must be positive", self.outlier_z_cutoff));
        }
        if !(self.label_range.1 > self.label_range.0) {
            return bad(format!("label range {:?} is empty", self.label_range));
        }
        if !(0.0..=1.0).contains(&self.relativity_min_abs_r) {
            return bad(format!("relativity_min_abs_r {} not in [0, 1]", self.relativity_min_abs_r));
        }
        self.network.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected `key = value`, got {content:?}"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|reason| Error::Config { line, reason })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets a single key; shared by the file parser and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value {v:?} for `{key}`"))
        }
        match key {
            "pca_threshold" => self.pca_threshold = num(key, value)?,
            "pca_mode" => self.pca_mode = value.to_string(),
            "outlier_z_cutoff" => self.outlier_z_cutoff = num(key, value)?,
            "drop_outliers" => self.drop_outliers = num(key, value)?,
            "label_min" => self.label_range.0 = num(key, value)?,
            "label_max" => self.label_range.1 = num(key, value)?,
            "forecast_horizon" => self.forecast_horizon = num(key, value)?,
            "relativity_min_abs_r" => self.relativity_min_abs_r = num(key, value)?,
            "n_hidden" => self.network.n_hidden = num(key, value)?,
            "learning_rate" => self.network.learning_rate = num(key, value)?,
            "max_epochs" => self.network.max_epochs = num(key, value)?,
            "loss_tolerance" => self.network.loss_tolerance = num(key, value)?,
            "seed" => self.network.seed = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_constants() {
        let c = PipelineConfig::default();
        assert_eq!(c.pca_threshold, 0.95);
        assert_eq!(c.network.n_hidden, 10);
        assert_eq!(c.network.n_input, 5);
        assert_eq!(c.forecast_horizon, 5);
        assert_eq!(c.label_range, (0.0, 120.0));
        assert_eq!(c.outlier_z_cutoff, 4.0);
        c.validate().unwrap();
    }

    #[test]
    fn parse_overrides() {
        let c = PipelineConfig::parse(
            "# comment\n\npca_threshold = 0.9\npca_mode=projection\nseed = 42\nlabel_max = 100\n",
        )
        .unwrap();
        assert_eq!(c.pca_threshold, 0.9);
        assert_eq!(c.pca_mode, "projection");
        assert_eq!(c.network.seed, 42);
        assert_eq!(c.label_range, (0.0, 100.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(PipelineConfig::parse("a = 1"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(
            PipelineConfig::parse("seed = 1\nnonsense"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(PipelineConfig::parse("seed = -1"), Err(Error::Config { line: 1, .. })));
        assert!(PipelineConfig::parse("pca_threshold = 1.5").is_err());
    }
}
