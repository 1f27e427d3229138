//! Training settings from defaults, an optional `key = value` file, and
//! command-line flags, in increasing precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cfn::train::{Orientation, SideInfoMode, TrainConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// u (U-CFN) or i (I-CFN).
    #[arg(long)]
    pub orientation: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Weight of the prediction term (corrupted entries).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of the reconstruction term (uncorrupted entries).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub mask_ratio: Option<f64>,
    /// λ is weight_decay / input width unless --lambda is set.
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lr0: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// none, input, hidden or both.
    #[arg(long)]
    pub side_info: Option<String>,
    /// Fraction of ratings used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Width of the SVD embedding of tag counts.
    #[arg(long)]
    pub svd_dim: Option<usize>,
}

/// Everything besides the network hyperparameters that a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub train: TrainConfig,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub svd_dim: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            train: TrainConfig::default(),
            train_fraction: 0.9,
            split_seed: 0,
            svd_dim: 50,
        }
    }
}

pub fn parse_kv(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError(format!(
                "{}:{}: expected key = value",
                origin.display(),
                n + 1
            ))
            .into());
        };
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| UsageError(format!("bad value '{v}' for {key}")).into())
}

fn apply(s: &mut RunSettings, key: &str, v: &str) -> Result<()> {
    let t = &mut s.train;
    match key {
        "orientation" => {
            t.orientation = v
                .parse::<Orientation>()
                .map_err(|e| UsageError(e.to_string()))?
        }
        "hidden" => t.hidden = parse(key, v)?,
        "alpha" => t.alpha = parse(key, v)?,
        "beta" => t.beta = parse(key, v)?,
        "mask_ratio" => t.mask_ratio = parse(key, v)?,
        "weight_decay" => t.weight_decay = parse(key, v)?,
        "lambda" => t.lambda = Some(parse(key, v)?),
        "lr0" => t.lr0 = parse(key, v)?,
        "lr_decay" => t.lr_decay = parse(key, v)?,
        "epochs" => t.epochs = parse(key, v)?,
        "batch_size" => t.batch_size = parse(key, v)?,
        "seed" => t.seed = parse(key, v)?,
        "side_info" => {
            t.side_info = v
                .parse::<SideInfoMode>()
                .map_err(|e| UsageError(e.to_string()))?
        }
        "train_fraction" => s.train_fraction = parse(key, v)?,
        "split_seed" => s.split_seed = parse(key, v)?,
        "svd_dim" => s.svd_dim = parse(key, v)?,
        other => return Err(UsageError(format!("unknown setting '{other}'")).into()),
    }
    Ok(())
}

impl TrainArgs {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => {$(
                if let Some(x) = &self.$f {
                    v.push((stringify!($f), x.to_string()));
                }
            )*};
        }
        push!(
            orientation,
            hidden,
            alpha,
            beta,
            mask_ratio,
            weight_decay,
            lambda,
            lr0,
            lr_decay,
            epochs,
            batch_size,
            seed,
            side_info,
            train_fraction,
            split_seed,
            svd_dim
        );
        v
    }

    pub fn resolve(&self) -> Result<RunSettings> {
        let mut s = RunSettings::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (k, v) in parse_kv(&text, path)? {
                apply(&mut s, &k, &v)?;
            }
        }
        for (k, v) in self.flag_pairs() {
            apply(&mut s, k, &v)?;
        }
        s.train.validate().map_err(|e| UsageError(e.to_string()))?;
        if !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
            return Err(UsageError(format!(
                "train_fraction must lie in (0, 1), got {}",
                s.train_fraction
            ))
            .into());
        }
        Ok(s)
    }
}
