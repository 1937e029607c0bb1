//! The batch commands behind the CLI. Each `cmd_*` computes in memory and
//! returns a value; the matching `write_*`/`save` puts it on disk.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bpnn::{self, Network, TrainReport};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::forecast::{self, LinearFit, RelativityCheck, TimeSeries};
use crate::ingest::{self, CountryYearRecord, FlaggedRecord, IndexKind};
use crate::numerics::{ColumnStats, Matrix};
use crate::pca::{self, PcaResult, ReductionRegistry};
use crate::rs_index::{self, RsScore};

/// Formats an RS value or correlation.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Formats a fraction as a percentage with two decimals.
pub fn fmt_pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// File-name-safe version of a country name.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if s.is_empty() {
        "unnamed".into()
    } else {
        s
    }
}

// ---------------------------------------------------------------- pca

/// Reads a two-column `index,eigenvalue` CSV.
pub fn load_eigenvalues(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ci, ce) = (col("index")?, col("eigenvalue")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let name = rec.get(ci).unwrap_or("").to_string();
        let cell = rec.get(ce).unwrap_or("");
        let value = ingest::parse_number(cell).ok_or_else(|| Error::ParseError {
            row: i + 1,
            column: "eigenvalue".into(),
            value: cell.to_string(),
        })?;
        // canonical code when the label is a known index
        let name = IndexKind::from_code(&name).map_or(name, |k| k.code().to_string());
        out.push((name, value));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PcaReport {
    pub result: PcaResult,
    pub mode: String,
    pub flagged: Vec<FlaggedRecord>,
}

impl PcaReport {
    /// Index / eigenvalue / Cr / accumulated Cr table plus the selected set.
    pub fn render(&self) -> String {
        let r = &self.result;
        let mut s = String::new();
        writeln!(s, "{:<8}{:>12}{:>10}{:>16}", "Index", "Eigenvalue", "Cr", "Accumulated Cr").unwrap();
        for i in 0..r.eigenvalues.len() {
            writeln!(
                s,
                "{:<8}{:>12.4}{:>10}{:>16}",
                r.index_names[i],
                r.eigenvalues[i],
                fmt_pct(r.contribution_rates[i]),
                fmt_pct(r.accumulated_rates[i])
            )
            .unwrap();
        }
        writeln!(
            s,
            "selected k = {} at threshold {} ({} mode): {}",
            r.selected_k,
            fmt_pct(r.threshold),
            self.mode,
            r.selected_indexes.join(", ")
        )
        .unwrap();
        for f in &self.flagged {
            writeln!(s, "flagged: {} {} ({} z = {:.2})", f.record.country, f.record.year, f.index, f.z)
                .unwrap();
        }
        s
    }

    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        Ok(vec![write_file(&out_dir.join("pca_report.txt"), &self.render())?])
    }
}

pub enum PcaSource<'a> {
    Records(&'a [CountryYearRecord]),
    /// Eigenvalues already attributed to indexes.
    Eigenvalues(&'a [(String, f64)]),
}

pub fn cmd_pca(source: PcaSource<'_>, config: &PipelineConfig) -> Result<PcaReport> {
    config.validate()?;
    match source {
        PcaSource::Eigenvalues(named) => Ok(PcaReport {
            result: PcaResult::from_eigenvalues(named, config.pca_threshold)?,
            mode: "eigenvalue-injection".into(),
            flagged: Vec::new(),
        }),
        PcaSource::Records(records) => {
            let registry = ReductionRegistry::with_builtins();
            let reduction = registry.get(&config.pca_mode)?;
            // all seven indexes must be present before screening
            ingest::index_matrix(records, &IndexKind::ALL)?;
            let screened = ingest::preprocess(records, config.outlier_z_cutoff, config.drop_outliers)?;
            let x = ingest::index_matrix(&screened.records, &IndexKind::ALL)?;
            let out = pca::run_pca(&x, config.pca_threshold, reduction)?;
            Ok(PcaReport { result: out.result, mode: reduction.name().into(), flagged: screened.flagged })
        }
    }
}

// ---------------------------------------------------------------- train / score

/// A network plus the input scaling it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringModel {
    pub network: Network,
    pub seed: u64,
    pub scaler: ColumnStats,
}

impl ScoringModel {
    /// Network output on the 0-100 scale for one record.
    pub fn bpnn_output(&self, record: &CountryYearRecord) -> Result<f64> {
        let x = self.scaler.standardize_row(&record.network_inputs())?;
        let act = bpnn::forward(&self.network, &x)?;
        Ok(100.0 * act.output[0])
    }

    pub fn score(&self, record: &CountryYearRecord) -> Result<RsScore> {
        rs_index::rs_transform(self.bpnn_output(record)?)
    }

    /// Scaler sidecar: one `feature <code> <mean> <sd>` line per input.
    pub fn scaler_text(&self) -> String {
        let mut s = String::new();
        for (k, kind) in IndexKind::NETWORK_INPUTS.iter().enumerate() {
            writeln!(
                s,
                "feature {} {:.16e} {:.16e}",
                kind.code(),
                self.scaler.means[k],
                self.scaler.sample_variances[k].sqrt()
            )
            .unwrap();
        }
        s
    }

    pub fn parse_scaler(text: &str) -> Result<ColumnStats> {
        let bad = |line: usize, reason: &str| Error::ModelFormat { line, reason: reason.into() };
        let mut means = Vec::new();
        let mut vars = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [tag, code, m, sd] = parts[..] else {
                return Err(bad(i + 1, "expected `feature <code> <mean> <sd>`"));
            };
            let expected = IndexKind::NETWORK_INPUTS.get(means.len());
            if tag != "feature" || expected.map(|k| k.code()) != Some(code) {
                return Err(bad(i + 1, "unexpected feature line"));
            }
            let m: f64 = m.parse().map_err(|_| bad(i + 1, "mean is not a number"))?;
            let sd: f64 = sd.parse().map_err(|_| bad(i + 1, "sd is not a number"))?;
            if !(sd > 0.0 && sd.is_finite() && m.is_finite()) {
                return Err(bad(i + 1, "sd must be positive and finite"));
            }
            means.push(m);
            vars.push(sd * sd);
        }
        if means.len() != IndexKind::NETWORK_INPUTS.len() {
            return Err(bad(0, "scaler must list all five network inputs"));
        }
        Ok(ColumnStats { means, sample_variances: vars })
    }

    pub fn scaler_path(model_path: &Path) -> PathBuf {
        let mut s = model_path.as_os_str().to_os_string();
        s.push(".scaler");
        PathBuf::from(s)
    }

    pub fn load(model_path: impl AsRef<Path>) -> Result<Self> {
        let path = model_path.as_ref();
        if !path.exists() {
            return Err(Error::ModelMissing(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (network, seed) = bpnn::read_model(&text)?;
        if network.topology().0 != IndexKind::NETWORK_INPUTS.len() || network.n_output() != 1 {
            return Err(Error::ModelFormat { line: 1, reason: "expected a 5-input, 1-output network".into() });
        }
        let sp = Self::scaler_path(path);
        if !sp.exists() {
            return Err(Error::ModelMissing(sp));
        }
        let stext = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
        Ok(Self { network, seed, scaler: Self::parse_scaler(&stext)? })
    }

    /// Writes `model.txt` and its `.scaler` sidecar into `out_dir`.
    pub fn save(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        let model = out_dir.join("model.txt");
        Ok(vec![
            write_file(&model, &bpnn::write_model(&self.network, self.seed))?,
            write_file(&Self::scaler_path(&model), &self.scaler_text())?,
        ])
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ScoringModel,
    pub report: TrainReport,
    pub flagged: Vec<FlaggedRecord>,
}

impl TrainOutcome {
    pub fn render_report(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        writeln!(s, "epochs_run {}", r.epochs_run).unwrap();
        writeln!(s, "stop_reason {:?}", r.stop_reason).unwrap();
        writeln!(s, "final_loss {:.6e}", r.final_loss()).unwrap();
        writeln!(s, "seed {}", self.model.seed).unwrap();
        for f in &self.flagged {
            writeln!(s, "flagged {} {} {} {:.4}", f.record.country, f.record.year, f.index, f.z).unwrap();
        }
        s
    }

    /// Model, scaler, a summary and the per-epoch loss curve.
    pub fn save(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = self.model.save(out_dir)?;
        paths.push(write_file(&out_dir.join("train_report.txt"), &self.render_report())?);
        let mut curve = String::new();
        for (e, l) in self.report.loss_history.iter().enumerate() {
            writeln!(curve, "{} {:.10e}", e + 1, l).unwrap();
        }
        paths.push(write_file(&out_dir.join("train_loss.dat"), &curve)?);
        Ok(paths)
    }
}

/// Fits the network on the five input indexes against normalized labels.
pub fn cmd_train(records: &[CountryYearRecord], config: &PipelineConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if records.iter().any(|r| r.fsi.is_none()) {
        return Err(Error::MissingColumn("fsi".into()));
    }
    let screened = ingest::preprocess(records, config.outlier_z_cutoff, config.drop_outliers)?;
    let kept = &screened.records;
    let x = ingest::index_matrix(kept, &IndexKind::NETWORK_INPUTS)?;
    let (z, scaler) = crate::numerics::standardize(&x)?;

    let raw: Vec<f64> = kept.iter().map(|r| r.fsi.expect("checked above")).collect();
    let (lo, hi) = config.label_range;
    let labels: Vec<f64> =
        rs_index::normalize_labels(&raw, lo, hi)?.into_iter().map(|v| v / 100.0).collect();
    let labels = Matrix::from_vec(labels.len(), 1, labels)?;

    let net_cfg = bpnn::NetworkConfig {
        n_input: IndexKind::NETWORK_INPUTS.len(),
        n_output: 1,
        ..config.network.clone()
    };
    let (network, report) = bpnn::train(&net_cfg, z.values(), &labels)?;
    Ok(TrainOutcome {
        model: ScoringModel { network, seed: net_cfg.seed, scaler },
        report,
        flagged: screened.flagged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecord {
    pub country: String,
    pub year: i32,
    pub score: RsScore,
}

pub fn cmd_score(records: &[CountryYearRecord], model: &ScoringModel) -> Result<Vec<ScoredRecord>> {
    records
        .iter()
        .map(|r| {
            Ok(ScoredRecord { country: r.country.clone(), year: r.year, score: model.score(r)? })
        })
        .collect()
}

pub fn render_scores(scores: &[ScoredRecord]) -> String {
    let mut s = String::from("country,year,bpnn,rs,category\n");
    for r in scores {
        let bpnn = r.score.bpnn_output.map(fmt4).unwrap_or_default();
        writeln!(s, "{},{},{},{},{}", r.country, r.year, bpnn, fmt4(r.score.value), r.score.category)
            .unwrap();
    }
    s
}

pub fn write_scores(scores: &[ScoredRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    Ok(vec![write_file(&out_dir.join("scores.csv"), &render_scores(scores))?])
}

// ---------------------------------------------------------------- forecast

#[derive(Debug, Clone, PartialEq)]
pub struct CountryForecast {
    pub country: String,
    pub series: TimeSeries,
    pub fit: LinearFit,
    pub relativity: RelativityCheck,
    pub predictions: Vec<(i32, f64)>,
}

const MIN_HISTORY: usize = 3;

/// RS series per country: the record's own `rs` column when every record of
/// the country has one, otherwise scores from `model`.
pub fn rs_series(
    records: &[CountryYearRecord],
    model: Option<&ScoringModel>,
) -> Result<BTreeMap<String, TimeSeries>> {
    let mut out = BTreeMap::new();
    for (country, group) in ingest::by_country(records) {
        let points: Vec<(i32, f64)> = if group.iter().all(|r| r.rs.is_some()) {
            group.iter().map(|r| (r.year, r.rs.expect("checked"))).collect()
        } else {
            let model = model.ok_or_else(|| Error::ModelMissing(PathBuf::from("<no --model given>")))?;
            group.iter().map(|r| Ok((r.year, model.score(r)?.value))).collect::<Result<_>>()?
        };
        out.insert(country, TimeSeries::new(points)?);
    }
    Ok(out)
}

fn forecast_one(country: String, series: TimeSeries, config: &PipelineConfig) -> Result<CountryForecast> {
    if series.len() < MIN_HISTORY {
        return Err(Error::InsufficientHistory { country, got: series.len(), needed: MIN_HISTORY });
    }
    let fit = forecast::fit(&series)?;
    let relativity = forecast::relativity_check(&series, config.relativity_min_abs_r)?;
    let last = series.last_year().expect("non-empty");
    let predictions = forecast::predict(&fit, &forecast::horizon_after(last, config.forecast_horizon));
    Ok(CountryForecast { country, series, fit, relativity, predictions })
}

/// Per-country OLS trend, correlation gate and horizon predictions, in
/// country-name order. Countries are fitted on scoped worker threads.
pub fn cmd_forecast(
    records: &[CountryYearRecord],
    model: Option<&ScoringModel>,
    config: &PipelineConfig,
) -> Result<Vec<CountryForecast>> {
    config.validate()?;
    let series = rs_series(records, model)?;
    let results: Vec<Result<CountryForecast>> = std::thread::scope(|scope| {
        let handles: Vec<_> = series
            .into_iter()
            .map(|(country, s)| scope.spawn(move || forecast_one(country, s, config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("forecast worker panicked")).collect()
    });
    results.into_iter().collect()
}

pub fn render_forecast_summary(forecasts: &[CountryForecast]) -> String {
    let mut s = String::from("country,r,slope,intercept,relativity\n");
    for f in forecasts {
        writeln!(
            s,
            "{},{},{:.6e},{:.6e},{}",
            f.country,
            fmt4(f.relativity.r),
            f.fit.slope,
            f.fit.intercept,
            if f.relativity.pass { "pass" } else { "FAILED" }
        )
        .unwrap();
    }
    s
}

pub fn render_predictions(forecasts: &[CountryForecast]) -> String {
    let mut s = String::from("country,year,predicted_rs\n");
    for f in forecasts {
        for (y, v) in &f.predictions {
            writeln!(s, "{},{},{}", f.country, y, fmt4(*v)).unwrap();
        }
    }
    s
}

pub fn write_forecasts(forecasts: &[CountryForecast], out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    Ok(vec![
        write_file(&out_dir.join("forecast_summary.csv"), &render_forecast_summary(forecasts))?,
        write_file(&out_dir.join("forecast.csv"), &render_predictions(forecasts))?,
    ])
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    /// `(file name, contents)` of the `year value` plot-data files.
    pub plot_data: Vec<(String, String)>,
}

impl Report {
    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        let mut paths = vec![write_file(&out_dir.join("report.txt"), &self.text)?];
        for (name, body) in &self.plot_data {
            paths.push(write_file(&out_dir.join(name), body)?);
        }
        Ok(paths)
    }
}

fn dat(points: &[(i32, f64)]) -> String {
    points.iter().map(|(y, v)| format!("{y} {}\n", fmt4(*v))).collect()
}

/// Record table with RS classes, forecast summary and predictions, plus
/// `<country>.dat` (observed RS) and `<country>_forecast.dat` files.
pub fn cmd_report(
    records: &[CountryYearRecord],
    model: Option<&ScoringModel>,
    config: &PipelineConfig,
) -> Result<Report> {
    let forecasts = cmd_forecast(records, model, config)?;
    let mut text = String::new();

    writeln!(text, "Region stability by country and year").unwrap();
    writeln!(
        text,
        "{:<12}{:>6}{:>10}{:>8}{:>8}{:>10}{:>8}{:>10}  class",
        "country", "year", "LAP/mm", "AAT/°C", "FO", "AMS/%", "PSR/%", "RS"
    )
    .unwrap();
    for f in &forecasts {
        let group = ingest::by_country(records).remove(&f.country).unwrap_or_default();
        for (r, (_, rs)) in group.iter().zip(f.series.points()) {
            writeln!(
                text,
                "{:<12}{:>6}{:>10}{:>8}{:>8}{:>10}{:>8}{:>10}  {}",
                r.country,
                r.year,
                r.lap_mm,
                r.aat_c,
                r.fo,
                r.ams_pct,
                r.psr_pct,
                fmt4(*rs),
                rs_index::classify(*rs)
            )
            .unwrap();
        }
    }

    writeln!(text, "\nLinear trend of RS against year").unwrap();
    writeln!(text, "{:<12}{:>10}{:>14}{:>12}", "country", "r", "slope/yr", "relativity").unwrap();
    for f in &forecasts {
        writeln!(
            text,
            "{:<12}{:>10}{:>14.6}{:>12}",
            f.country,
            fmt4(f.relativity.r),
            f.fit.slope,
            if f.relativity.pass { "pass" } else { "FAILED" }
        )
        .unwrap();
    }

    writeln!(text, "\nPredicted RS").unwrap();
    for f in &forecasts {
        let row: Vec<String> =
            f.predictions.iter().map(|(y, v)| format!("{y}: {} ({})", fmt4(*v), rs_index::classify(*v))).collect();
        writeln!(text, "{:<12}{}", f.country, row.join("  ")).unwrap();
    }

    let mut plot_data = Vec::new();
    for f in &forecasts {
        let s = slug(&f.country);
        plot_data.push((format!("{s}.dat"), dat(f.series.points())));
        plot_data.push((format!("{s}_forecast.dat"), dat(&f.predictions)));
    }
    Ok(Report { text, plot_data })
}
