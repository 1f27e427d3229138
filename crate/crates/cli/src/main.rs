//! `cfn`: ingest rating data, train collaborative filtering networks,
//! evaluate them, run sweeps, and serve single predictions.

mod commands;
mod manifest;
mod settings;
mod snapshot;

use std::path::PathBuf;
use std::process::ExitCode;

use cfn::CfnError;
use clap::{Parser, Subcommand, ValueEnum};

use settings::TrainArgs;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "cfn", version, about = "Collaborative filtering networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClusterBy {
    Item,
    User,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SweepKind {
    Ratio,
    Dae,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw rating (and tag) files into a dataset directory.
    Ingest {
        #[arg(long)]
        ratings: PathBuf,
        /// movielens_dat or csv.
        #[arg(long, default_value = "movielens_dat")]
        format: String,
        /// Tag counts (movielens_tags) or a friendship list (adjacency_csv).
        #[arg(long)]
        tags: Option<PathBuf>,
        #[arg(long, default_value = "movielens_tags")]
        tag_format: String,
        /// movies.dat-style genre list, used as 0/1 flags.
        #[arg(long)]
        genres: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a network on the training part of a dataset directory.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        settings: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Global and per-cluster test RMSE of a trained model.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        /// Defaults to the dataset the model was trained on.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "item")]
        clusters: ClusterBy,
        #[arg(long, default_value_t = 5)]
        n_clusters: usize,
        /// Defaults to the model directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Training-ratio or denoising-weight sweeps, written as CSV.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        settings: TrainArgs,
        /// Comma-separated training fractions.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
        )]
        ratios: Vec<f64>,
        /// Comma-separated seeds for the ratio sweep.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1")]
        betas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5")]
        masks: Vec<f64>,
        /// Keep only this fraction of the ratings before sweeping.
        #[arg(long)]
        subsample: Option<f64>,
        /// Configurations trained at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one predicted rating.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        user: String,
        #[arg(long)]
        item: String,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<CfnError>() {
        Some(CfnError::NonFinite(_) | CfnError::Diverged { .. }) => 3,
        Some(CfnError::InvalidArgument(_) | CfnError::Unsupported(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Ingest {
            ratings,
            format,
            tags,
            tag_format,
            genres,
            out,
        } => commands::ingest(
            &ratings,
            &format,
            tags.as_deref(),
            &tag_format,
            genres.as_deref(),
            &out,
        ),
        Command::Train {
            data,
            settings,
            out,
        } => commands::train(&data, &settings, &out),
        Command::Evaluate {
            model,
            data,
            clusters,
            n_clusters,
            out,
        } => commands::evaluate(
            &model,
            data.as_deref(),
            clusters,
            n_clusters,
            out.as_deref(),
        ),
        Command::Sweep {
            kind,
            data,
            settings,
            ratios,
            seeds,
            betas,
            masks,
            subsample,
            jobs,
            out,
        } => {
            let grid = commands::SweepGrid {
                ratios,
                seeds,
                betas,
                masks,
                subsample,
            };
            commands::sweep(kind, &data, &settings, &grid, jobs, &out)
        }
        Command::Predict {
            model,
            data,
            user,
            item,
        } => commands::predict(&model, data.as_deref(), &user, &item),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
