use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bankrisk::config::{Config, DATA_ROOT_ENV};
use bankrisk::pipeline;
use bankrisk::report::render_text;
use bankrisk::service::{self, Snapshot};
use bankrisk_core::{FeatureSet, ModelKind};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bankrisk", version, about = "Bankruptcy-risk pipeline")]
struct Cli {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured data root.
    #[arg(long, global = true, env = DATA_ROOT_ENV)]
    data_root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch articles for every keyword and year and store them.
    Ingest,
    /// Score the stored corpus per sector and year.
    Sentiment,
    /// Compute ratios, Z and Z′ scores and zones for the records.
    Ratios,
    /// Join records and sentiment into the model dataset.
    Build,
    /// Train one model on the per-year training partitions.
    Train {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        feature_set: Option<String>,
    },
    /// Run the per-year experiment grid.
    Evaluate {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Score every company with the trained model.
    Score {
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Serve the scoring artifacts over HTTP.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        host: Option<String>,
    },
}

fn print_json(value: &impl Serialize) -> Result<()> {
    print_text(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn print_text(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    }
    .with_env();
    if let Some(root) = &cli.data_root {
        config.data_root = root.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Ingest => {
            let source = pipeline::fetcher_for(&config)?;
            let summary = pipeline::ingest(&config, source.as_ref())?;
            print_json(&summary)?;
            if !summary.errors.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sentiment => print_json(&pipeline::sentiment(&config)?)?,
        Command::Ratios => print_json(&pipeline::ratios(&config)?)?,
        Command::Build => print_json(&pipeline::build(&config)?)?,
        Command::Train { model, feature_set } => {
            let kind = match model {
                Some(m) => m.parse::<ModelKind>()?,
                None => config.scoring.model,
            };
            let set = match feature_set {
                Some(s) => s.parse::<FeatureSet>()?,
                None => config.scoring.feature_set,
            };
            print_json(&pipeline::train(&config, kind, set)?)?;
        }
        Command::Evaluate { format } => {
            let report = pipeline::evaluate(&config)?;
            match format {
                Format::Json => print_json(&report)?,
                Format::Text => print_text(&render_text(&report))?,
            }
        }
        Command::Score { threshold } => {
            if let Some(t) = threshold {
                config.scoring.threshold = t;
            }
            print_json(&pipeline::score(&config)?)?;
        }
        Command::Serve { port, host } => {
            let snapshot = Snapshot::load(&config.layout())?;
            let host = host.unwrap_or(config.server.host.clone());
            let addr: SocketAddr = format!("{host}:{}", port.unwrap_or(config.server.port))
                .parse()
                .with_context(|| format!("bad listen address {host}"))?;
            eprintln!("serving {} on http://{addr}", config.data_root.display());
            tokio::runtime::Runtime::new()?.block_on(service::serve(snapshot, addr))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
