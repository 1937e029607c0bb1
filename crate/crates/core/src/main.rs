use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regstab::config::PipelineConfig;
use regstab::pipeline::{self, PcaSource, ScoringModel};
use regstab::{ingest, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "regstab", version, about = "Regional stability: PCA, BP network scoring and RS forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Contribution-rate table and selected indexes
    Pca(CommonArgs),
    /// Train the 5-10-1 network on labelled records
    Train(CommonArgs),
    /// Score records with a trained model
    Score(CommonArgs),
    /// Fit RS trends per country and predict the following years
    Forecast(CommonArgs),
    /// Tables plus per-country plot data
    Report(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// `key = value` config file; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV; repeat to combine several files
    #[arg(long)]
    data: Vec<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// `index,eigenvalue` CSV to tabulate instead of decomposing data
    #[arg(long)]
    eigenvalues: Option<PathBuf>,
    /// Reduction strategy name (index-selection or projection)
    #[arg(long)]
    mode: Option<String>,
}

impl CommonArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(t) = self.threshold {
            cfg.pca_threshold = t;
        }
        if let Some(s) = self.seed {
            cfg.network.seed = s;
        }
        if let Some(h) = self.horizon {
            cfg.forecast_horizon = h;
        }
        if let Some(m) = &self.mode {
            cfg.pca_mode = m.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn records(&self) -> Result<Vec<ingest::CountryYearRecord>> {
        if self.data.is_empty() {
            return Err(Error::InvalidConfig("at least one --data file is required".into()));
        }
        ingest::load_many(&self.data)
    }

    fn model(&self) -> Result<Option<ScoringModel>> {
        self.model.as_ref().map(ScoringModel::load).transpose()
    }
}

fn run(cli: Cli) -> Result<()> {
    let written = match cli.command {
        Command::Pca(a) => {
            let cfg = a.config()?;
            let report = if let Some(path) = &a.eigenvalues {
                let named = pipeline::load_eigenvalues(path)?;
                pipeline::cmd_pca(PcaSource::Eigenvalues(&named), &cfg)?
            } else {
                pipeline::cmd_pca(PcaSource::Records(&a.records()?), &cfg)?
            };
            print!("{}", report.render());
            report.write(&a.out)?
        }
        Command::Train(a) => {
            let cfg = a.config()?;
            let outcome = pipeline::cmd_train(&a.records()?, &cfg)?;
            print!("{}", outcome.render_report());
            outcome.save(&a.out)?
        }
        Command::Score(a) => {
            let path = a.model.clone().ok_or_else(|| Error::ModelMissing("<no --model given>".into()))?;
            let model = ScoringModel::load(path)?;
            let scores = pipeline::cmd_score(&a.records()?, &model)?;
            print!("{}", pipeline::render_scores(&scores));
            pipeline::write_scores(&scores, &a.out)?
        }
        Command::Forecast(a) => {
            let cfg = a.config()?;
            let forecasts = pipeline::cmd_forecast(&a.records()?, a.model()?.as_ref(), &cfg)?;
            print!("{}", pipeline::render_forecast_summary(&forecasts));
            for f in forecasts.iter().filter(|f| !f.relativity.pass) {
                eprintln!(
                    "warning: {} fails the linear relativity check (|r| = {:.4} < {})",
                    f.country,
                    f.relativity.r.abs(),
                    cfg.relativity_min_abs_r
                );
            }
            pipeline::write_forecasts(&forecasts, &a.out)?
        }
        Command::Report(a) => {
            let cfg = a.config()?;
            let report = pipeline::cmd_report(&a.records()?, a.model()?.as_ref(), &cfg)?;
            print!("{}", report.text);
            report.write(&a.out)?
        }
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
