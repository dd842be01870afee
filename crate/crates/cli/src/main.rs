//! `vidframing` — corpus feature pipeline driver.
//!
//! Exit codes: 0 success, 1 per-item failures occurred, 2 configuration
//! error.

mod commands;
mod config;
mod table;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::PipelineConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit 2.
    Config(String),
    /// The run completed but some items failed; exit 1.
    Partial(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn partial(msg: impl Into<String>) -> CliError {
        CliError::Partial(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Partial(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "vidframing", version, about = "Compare visual framing of video corpora")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the worker thread count (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the external decoder for every video that still needs frames.
    Extract,
    /// Write the per-(video, segment) feature CSV.
    Features,
    /// Welch/BH comparison of two label groups over one segment.
    Compare {
        group_a: String,
        group_b: String,
        #[arg(long, default_value = "all")]
        segment: String,
    },
    /// Stratified k-fold cross-validation over a feature set.
    Cv {
        /// Feature set: visual20, emotions10, wordcount10000,
        /// embedding200, or unions joined with '+'.
        features: String,
        /// rf or mlp; defaults to the configured model kind.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value = "all")]
        segment: String,
    },
    /// Permutation importance of a trained model.
    Importance {
        features: String,
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value = "all")]
        segment: String,
    },
    /// Per-group density data for one feature.
    PlotData {
        feature: String,
        #[arg(long, default_value = "all")]
        segment: String,
    },
    /// Top/bottom-k videos by one feature.
    Extremes {
        feature: String,
        #[arg(long, default_value = "all")]
        segment: String,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .ok_or_else(|| CliError::config("--config is required"))?;
    let mut config = PipelineConfig::load(&config_path)?;
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if config.workers > 0 {
        // ignore the error if a pool already exists (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global();
    }

    match cli.command {
        Command::Extract => commands::extract(&config),
        Command::Features => commands::features(&config),
        Command::Compare {
            group_a,
            group_b,
            segment,
        } => commands::compare(&config, &group_a, &group_b, &segment),
        Command::Cv {
            features,
            model,
            segment,
        } => commands::cv(&config, model.as_deref(), &features, &segment),
        Command::Importance {
            features,
            model,
            segment,
        } => commands::importance(&config, model.as_deref(), &features, &segment),
        Command::PlotData { feature, segment } => {
            commands::plot_data(&config, &feature, &segment)
        }
        Command::Extremes {
            feature,
            segment,
            k,
        } => commands::extremes(&config, &feature, &segment, k),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Partial(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
