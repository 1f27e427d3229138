use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cfn::data::{
    load_ratings, load_tags, split, subsample, Axis, RatingFormat, SplitSpec, TagFormat,
};
use cfn::eval::{
    evaluate as eval_model, sweep_dae, sweep_training_ratio, write_rows_csv, Predictor,
};
use cfn::preprocess::{Preprocessor, SideInfoTable};
use cfn::train::{
    load_checkpoint, save_checkpoint, train as train_model, CfnModel, CfnPredictor, SideInfoMode,
};

use crate::manifest::RunManifest;
use crate::settings::{RunSettings, TrainArgs};
use crate::snapshot::{RawTags, SideFile, Snapshot, Stats, RATINGS, SIDE, STATS};
use crate::{ClusterBy, SweepKind, UsageError};

pub const CHECKPOINT: &str = "model.ckpt";
pub const RUN: &str = "run.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn usage(e: cfn::CfnError) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

pub fn ingest(
    ratings: &Path,
    format: &str,
    tags: Option<&Path>,
    tag_format: &str,
    genres: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let format: RatingFormat = format.parse().map_err(usage)?;
    let tag_format: TagFormat = tag_format.parse().map_err(usage)?;
    if tag_format == TagFormat::GenreFlags {
        return Err(UsageError("pass genre lists with --genres".into()).into());
    }
    let mut manifest = RunManifest::start(
        "ingest",
        serde_json::json!({
            "format": format!("{format:?}"),
            "tag_format": format!("{tag_format:?}"),
        }),
    );
    manifest.input(ratings)?;
    let loaded = load_ratings(ratings, format)?;
    let m = &loaded.matrix;
    create_dir(out)?;

    let mut side = SideFile::default();
    if let Some(path) = tags {
        manifest.input(path)?;
        let t = load_tags(path, tag_format, &loaded.ids)?;
        if t.dropped > 0 {
            log::warn!("{} tag rows refer to unknown entities", t.dropped);
        }
        side.counts = Some(RawTags::from_matrix(&t.matrix, tag_format, &loaded.ids));
    }
    if let Some(path) = genres {
        manifest.input(path)?;
        let g = load_tags(path, TagFormat::GenreFlags, &loaded.ids)?;
        side.flags = Some(RawTags::from_matrix(
            &g.matrix,
            TagFormat::GenreFlags,
            &loaded.ids,
        ));
    }

    let ratings_out = out.join(RATINGS);
    cfn::data::write_ratings_csv(&ratings_out, m, &loaded.ids)?;
    manifest.artifact(&ratings_out);
    let side_out = out.join(SIDE);
    if side.counts.is_some() || side.flags.is_some() {
        fs::write(&side_out, serde_json::to_vec(&side)?)?;
        manifest.artifact(&side_out);
    } else if side_out.exists() {
        fs::remove_file(&side_out)?;
    }
    let stats = Stats {
        n_users: m.n_users(),
        n_items: m.n_items(),
        n_ratings: m.len(),
        density: m.density(),
        min_rating: loaded.scale.min_rating,
        max_rating: loaded.scale.max_rating,
        duplicates: loaded.duplicates,
    };
    let stats_out = out.join(STATS);
    fs::write(&stats_out, serde_json::to_vec_pretty(&stats)?)?;
    manifest.artifact(&stats_out);
    manifest.finish(out)?;
    println!(
        "{} users, {} items, {} ratings, density {:.4}",
        stats.n_users, stats.n_items, stats.n_ratings, stats.density
    );
    Ok(())
}

/// Side table required by `settings`, if any.
fn side_for(snap: &Snapshot, s: &RunSettings) -> Result<Option<SideInfoTable>> {
    if s.train.side_info == SideInfoMode::None {
        return Ok(None);
    }
    snap.side_table(s.train.orientation.axis(), s.svd_dim)
        .map(Some)
}

pub fn train(data: &Path, args: &TrainArgs, out: &Path) -> Result<()> {
    let s = args.resolve()?;
    let snap = Snapshot::load(data)?;
    let mut manifest = RunManifest::start("train", serde_json::to_value(&s)?);
    for f in snap.input_files() {
        manifest.input(&f)?;
    }
    let side = side_for(&snap, &s)?;
    let scale = snap.ratings.scale;
    let (tr, te) = split(
        &snap.ratings.matrix,
        SplitSpec::new(s.train_fraction, s.split_seed)?,
    )?;
    let pre = Preprocessor::fit(&tr, scale, s.train.orientation.axis())?;
    create_dir(out)?;

    let mut hook = |epoch: usize, model: &CfnModel| -> cfn::Result<Option<f64>> {
        if te.is_empty() {
            return Ok(None);
        }
        let p = CfnPredictor::new(model, &tr, side.as_ref())?;
        let r = cfn::eval::rmse(&p, &te)?;
        log::info!("epoch {epoch}: test rmse {r:.4}");
        Ok(Some(r))
    };
    let state = train_model(&tr, side.as_ref(), &s.train, &pre, Some(&mut hook))?;

    let ckpt = out.join(CHECKPOINT);
    save_checkpoint(&ckpt, &state)?;
    manifest.artifact(&ckpt);
    let curve = out.join("loss_curve.csv");
    write_rows_csv(&curve, &state.loss_curve)?;
    manifest.artifact(&curve);
    let run = out.join(RUN);
    fs::write(
        &run,
        serde_json::to_vec_pretty(&RunRecord {
            data: data.to_path_buf(),
            settings: s,
        })?,
    )?;
    manifest.artifact(&run);
    manifest.finish(out)?;
    if let Some(last) = state.loss_curve.last() {
        println!(
            "epoch {} loss {:.6} rmse {}",
            last.epoch,
            last.loss,
            last.rmse.map_or("-".into(), |r| format!("{r:.4}"))
        );
    }
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RunRecord {
    data: PathBuf,
    settings: RunSettings,
}

struct Loaded {
    snap: Snapshot,
    model: CfnModel,
    settings: RunSettings,
    side: Option<SideInfoTable>,
}

fn load_model(model_dir: &Path, data: Option<&Path>) -> Result<Loaded> {
    let run_path = model_dir.join(RUN);
    let run: RunRecord = serde_json::from_slice(
        &fs::read(&run_path).with_context(|| format!("reading {}", run_path.display()))?,
    )?;
    let model = load_checkpoint(model_dir.join(CHECKPOINT))?.model;
    let snap = Snapshot::load(data.unwrap_or(&run.data))?;
    let side = side_for(&snap, &run.settings)?;
    Ok(Loaded {
        snap,
        model,
        settings: run.settings,
        side,
    })
}

pub fn evaluate(
    model_dir: &Path,
    data: Option<&Path>,
    by: ClusterBy,
    n_clusters: usize,
    out: Option<&Path>,
) -> Result<()> {
    let l = load_model(model_dir, data)?;
    let s = &l.settings;
    let (tr, te) = split(
        &l.snap.ratings.matrix,
        SplitSpec::new(s.train_fraction, s.split_seed)?,
    )?;
    let axis = match by {
        ClusterBy::Item => Axis::Item,
        ClusterBy::User => Axis::User,
    };
    let report = eval_model(&l.model, &tr, &te, l.side.as_ref(), axis, n_clusters)?;
    let out = out.unwrap_or(model_dir);
    create_dir(out)?;
    let mut manifest = RunManifest::start("evaluate", serde_json::to_value(s)?);
    manifest.input(&model_dir.join(CHECKPOINT))?;
    for f in l.snap.input_files() {
        manifest.input(&f)?;
    }
    let json = out.join("report.json");
    fs::write(&json, serde_json::to_vec_pretty(&report)?)?;
    manifest.artifact(&json);
    let csv = out.join("clusters.csv");
    write_rows_csv(&csv, &report.per_cluster)?;
    manifest.artifact(&csv);
    manifest.finish(out)?;

    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "rmse {:.4} over {} test ratings",
        report.rmse, report.n_test
    )?;
    for c in &report.per_cluster {
        let r = c.rmse.map_or("-".to_string(), |r| format!("{r:.4}"));
        writeln!(stdout, "  {:<8} {r} ({} ratings)", c.label, c.n_entries)?;
    }
    Ok(())
}

pub struct SweepGrid {
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    pub betas: Vec<f64>,
    pub masks: Vec<f64>,
    pub subsample: Option<f64>,
}

pub fn sweep(
    kind: SweepKind,
    data: &Path,
    args: &TrainArgs,
    grid: &SweepGrid,
    jobs: usize,
    out: &Path,
) -> Result<()> {
    if jobs == 0 {
        bail!(UsageError("--jobs must be at least 1".into()));
    }
    let s = args.resolve()?;
    let snap = Snapshot::load(data)?;
    let side = side_for(&snap, &s)?;
    let full = &snap.ratings.matrix;
    let sub;
    let dataset = match grid.subsample {
        Some(f) => {
            sub = subsample(full, f, s.split_seed).map_err(usage)?;
            &sub
        }
        None => full,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    create_dir(out)?;
    let mut manifest = RunManifest::start(
        "sweep",
        serde_json::json!({
            "kind": format!("{kind:?}"),
            "settings": s,
            "ratios": grid.ratios,
            "seeds": grid.seeds,
            "betas": grid.betas,
            "masks": grid.masks,
            "subsample": grid.subsample,
        }),
    );
    for f in snap.input_files() {
        manifest.input(&f)?;
    }
    let scale = snap.ratings.scale;
    let path = match kind {
        SweepKind::Ratio => {
            let rows = pool.install(|| {
                sweep_training_ratio(
                    dataset,
                    scale,
                    &grid.ratios,
                    &s.train,
                    &grid.seeds,
                    side.as_ref(),
                )
            })?;
            let p = out.join("sweep_ratio.csv");
            write_rows_csv(&p, &rows)?;
            p
        }
        SweepKind::Dae => {
            let spec = SplitSpec::new(s.train_fraction, s.split_seed)?;
            let cells = pool.install(|| {
                sweep_dae(
                    dataset,
                    scale,
                    spec,
                    &grid.betas,
                    &grid.masks,
                    &s.train,
                    side.as_ref(),
                )
            })?;
            let p = out.join("sweep_dae.csv");
            write_rows_csv(&p, &cells)?;
            p
        }
    };
    manifest.artifact(&path);
    manifest.finish(out)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn predict(model_dir: &Path, data: Option<&Path>, user: &str, item: &str) -> Result<()> {
    let l = load_model(model_dir, data)?;
    let s = &l.settings;
    let (tr, _) = split(
        &l.snap.ratings.matrix,
        SplitSpec::new(s.train_fraction, s.split_seed)?,
    )?;
    let ids = &l.snap.ratings.ids;
    let pre = &l.model.preprocessor;
    let value = match (ids.users.get(user), ids.items.get(item)) {
        (Some(u), Some(i)) => {
            let p = CfnPredictor::new(&l.model, &tr, l.side.as_ref())?;
            p.predict(u as usize, i as usize)?
        }
        (u, i) => {
            if u.is_none() {
                log::warn!("unknown user '{user}'");
            }
            if i.is_none() {
                log::warn!("unknown item '{item}'");
            }
            // the known side still carries its mean
            let entity = match pre.bias.orientation {
                Axis::User => u,
                Axis::Item => i,
            };
            let mean = entity.map_or(pre.bias.global_mean, |e| pre.bias.mean(e as usize));
            pre.scaler.scale.clamp(mean)
        }
    };
    println!("{value}");
    Ok(())
}
