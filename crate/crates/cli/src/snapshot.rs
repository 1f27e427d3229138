//! Ingested dataset directory: `ratings.csv`, optional `side.json`, and
//! `stats.json`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cfn::data::{read_ratings_csv, Axis, IdMaps, LoadedRatings, TagFormat, TagMatrix};
use cfn::preprocess::{build_side_info, svd_embed, SideInfoTable};
use serde::{Deserialize, Serialize};

pub const RATINGS: &str = "ratings.csv";
pub const SIDE: &str = "side.json";
pub const STATS: &str = "stats.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stats {
    pub n_users: usize,
    pub n_items: usize,
    pub n_ratings: usize,
    pub density: f64,
    pub min_rating: f64,
    pub max_rating: f64,
    pub duplicates: usize,
}

/// Tag matrix keyed by raw entity ids so it survives re-indexing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawTags {
    pub format: String,
    pub tag_names: Vec<String>,
    pub entries: Vec<(String, u32, u32)>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SideFile {
    /// Count data (tags, friendships), embedded by truncated SVD.
    pub counts: Option<RawTags>,
    /// 0/1 flags (genres), used as is.
    pub flags: Option<RawTags>,
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::User => "user",
        Axis::Item => "item",
    }
}

impl RawTags {
    pub fn from_matrix(m: &TagMatrix, format: TagFormat, ids: &IdMaps) -> Self {
        let map = ids.axis(format.axis());
        RawTags {
            format: format!("{format:?}"),
            tag_names: m.tag_names().to_vec(),
            entries: m
                .entries()
                .iter()
                .map(|&(e, t, c)| (map.raw(e as usize).unwrap_or_default().to_string(), t, c))
                .collect(),
        }
    }

    fn axis(&self) -> Axis {
        if self.format.contains("Adjacency") {
            Axis::User
        } else {
            Axis::Item
        }
    }

    fn to_matrix(&self, ids: &IdMaps) -> Result<TagMatrix> {
        let map = ids.axis(self.axis());
        let triplets: Vec<(u32, u32, u32)> = self
            .entries
            .iter()
            .filter_map(|(raw, t, c)| map.get(raw).map(|e| (e, *t, *c)))
            .collect();
        Ok(TagMatrix::new(map.len(), self.tag_names.len(), triplets)?
            .with_tag_names(self.tag_names.clone())?)
    }
}

pub struct Snapshot {
    pub dir: PathBuf,
    pub ratings: LoadedRatings,
    pub side: SideFile,
}

impl Snapshot {
    pub fn load(dir: &Path) -> Result<Self> {
        let ratings = read_ratings_csv(dir.join(RATINGS))?;
        let side_path = dir.join(SIDE);
        let side = if side_path.exists() {
            let text = std::fs::read(&side_path)
                .with_context(|| format!("reading {}", side_path.display()))?;
            serde_json::from_slice(&text)?
        } else {
            SideFile::default()
        };
        Ok(Snapshot {
            dir: dir.to_path_buf(),
            ratings,
            side,
        })
    }

    pub fn input_files(&self) -> Vec<PathBuf> {
        [RATINGS, SIDE]
            .iter()
            .map(|f| self.dir.join(f))
            .filter(|p| p.exists())
            .collect()
    }

    /// Side table for entities along `axis`: the SVD embedding of the count
    /// data followed by the flags, whichever are present.
    pub fn side_table(&self, axis: Axis, svd_dim: usize) -> Result<SideInfoTable> {
        let ids = &self.ratings.ids;
        let pick = |t: &Option<RawTags>| -> Result<Option<TagMatrix>> {
            match t {
                Some(raw) if raw.axis() == axis => Ok(Some(raw.to_matrix(ids)?)),
                _ => Ok(None),
            }
        };
        let counts = pick(&self.side.counts)?;
        let flags = pick(&self.side.flags)?;
        let n = ids.axis(axis).len();
        Ok(match (counts, flags) {
            (None, None) => bail!(
                "the dataset has no side information for {}s",
                axis_name(axis)
            ),
            (Some(c), None) => svd_embed(&c, svd_dim)?,
            (None, Some(f)) => SideInfoTable::from_binary(&f),
            (Some(c), Some(f)) => build_side_info(&svd_embed(&c, svd_dim)?, &f)?,
        })
        .and_then(|t: SideInfoTable| {
            if t.n_entities() != n {
                bail!(
                    "side table covers {} entities, expected {n}",
                    t.n_entities()
                );
            }
            Ok(t)
        })
    }
}
