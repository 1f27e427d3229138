//! Sparse rating storage, dataset loaders and train/test splitting.

mod load;
mod snapshot;
mod split;
mod tags;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{CfnError, Result};

pub use load::{load_ratings, parse_ratings, LoadedRatings, RatingFormat};
pub use snapshot::{read_ratings_csv, write_ratings_csv};
pub use split::{split, subsample, SplitSpec};
pub use tags::{load_tags, parse_tags, LoadedTags, TagFormat, TagMatrix, MOVIELENS_GENRES};

/// One observed rating, addressed by internal indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: u32,
    pub item: u32,
    pub value: f64,
}

/// Which side of the rating matrix a vector is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Rows: one vector per user, indexed by item.
    User,
    /// Columns: one vector per item, indexed by user.
    Item,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::User => Axis::Item,
            Axis::Item => Axis::User,
        }
    }
}

/// Read access to the known entries of a rating matrix, one vector at a time.
///
/// Training only ever touches ratings through this trait, which lets tests
/// record every entry the trainer observes.
pub trait RatingSource {
    fn n_users(&self) -> usize;
    fn n_items(&self) -> usize;
    /// Known entries of row `entity` (axis `User`) or column `entity`
    /// (axis `Item`) as `(counterpart index, rating)`, sorted by index.
    fn vector(&self, axis: Axis, entity: usize) -> &[(u32, f64)];

    fn n_entities(&self, axis: Axis) -> usize {
        match axis {
            Axis::User => self.n_users(),
            Axis::Item => self.n_items(),
        }
    }
}

/// Sparse user × item matrix of known ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    n_users: usize,
    n_items: usize,
    entries: Vec<Rating>,
    rows: Vec<Vec<(u32, f64)>>,
    cols: Vec<Vec<(u32, f64)>>,
}

impl RatingMatrix {
    /// Builds the matrix and its row/column indices. Entries keep their order.
    pub fn new(n_users: usize, n_items: usize, entries: Vec<Rating>) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_users];
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_items];
        for r in &entries {
            let (u, i) = (r.user as usize, r.item as usize);
            if u >= n_users || i >= n_items {
                return Err(CfnError::OutOfRange(format!(
                    "rating ({u}, {i}) outside {n_users}x{n_items}"
                )));
            }
            if !r.value.is_finite() {
                return Err(CfnError::NonFinite(format!("rating ({u}, {i})")));
            }
            rows[u].push((r.item, r.value));
            cols[i].push((r.user, r.value));
        }
        for row in rows.iter_mut() {
            row.sort_unstable_by_key(|&(i, _)| i);
        }
        for (u, row) in rows.iter().enumerate() {
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(CfnError::InvalidArgument(format!(
                    "duplicate rating for ({u}, {})",
                    w[0].0
                )));
            }
        }
        for col in cols.iter_mut() {
            col.sort_unstable_by_key(|&(u, _)| u);
        }
        Ok(RatingMatrix {
            n_users,
            n_items,
            entries,
            rows,
            cols,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn row(&self, user: usize) -> &[(u32, f64)] {
        &self.rows[user]
    }

    pub fn col(&self, item: usize) -> &[(u32, f64)] {
        &self.cols[item]
    }

    /// Fraction of the user × item grid that is observed.
    pub fn density(&self) -> f64 {
        if self.n_users == 0 || self.n_items == 0 {
            return 0.0;
        }
        self.entries.len() as f64 / (self.n_users as f64 * self.n_items as f64)
    }

    pub fn get(&self, user: usize, item: usize) -> Option<f64> {
        let row = self.rows.get(user)?;
        row.binary_search_by_key(&(item as u32), |&(i, _)| i)
            .ok()
            .map(|p| row[p].1)
    }

    /// Number of known ratings per entity along `axis`.
    pub fn counts(&self, axis: Axis) -> Vec<usize> {
        match axis {
            Axis::User => self.rows.iter().map(Vec::len).collect(),
            Axis::Item => self.cols.iter().map(Vec::len).collect(),
        }
    }

    /// Builds a matrix of the same shape over a subset of this one's entries.
    pub(crate) fn with_entries(&self, entries: Vec<Rating>) -> Result<Self> {
        RatingMatrix::new(self.n_users, self.n_items, entries)
    }
}

impl RatingSource for RatingMatrix {
    fn n_users(&self) -> usize {
        self.n_users
    }

    fn n_items(&self) -> usize {
        self.n_items
    }

    fn vector(&self, axis: Axis, entity: usize) -> &[(u32, f64)] {
        match axis {
            Axis::User => &self.rows[entity],
            Axis::Item => &self.cols[entity],
        }
    }
}

/// Range and granularity of the rating values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min_rating: f64,
    pub max_rating: f64,
    pub is_discrete: bool,
    /// Spacing between admissible values; 0 when continuous.
    pub step: f64,
}

impl RatingScale {
    pub fn new(min_rating: f64, max_rating: f64, step: Option<f64>) -> Result<Self> {
        if !(min_rating.is_finite() && max_rating.is_finite() && min_rating < max_rating) {
            return Err(CfnError::InvalidArgument(format!(
                "rating scale needs min < max, got [{min_rating}, {max_rating}]"
            )));
        }
        match step {
            Some(step) => {
                let levels = (max_rating - min_rating) / step;
                if step.is_nan()
                    || step <= 0.0
                    || (levels - levels.round()).abs() > 1e-9
                    || levels.round() < 1.0
                {
                    return Err(CfnError::InvalidArgument(format!(
                        "step {step} does not divide [{min_rating}, {max_rating}]"
                    )));
                }
                Ok(RatingScale {
                    min_rating,
                    max_rating,
                    is_discrete: true,
                    step,
                })
            }
            None => Ok(RatingScale {
                min_rating,
                max_rating,
                is_discrete: false,
                step: 0.0,
            }),
        }
    }

    /// Infers the scale from observed values: the smallest gap between
    /// distinct values is taken as the step when every value lies on that grid.
    pub fn infer(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut distinct: Vec<f64> = values.into_iter().collect();
        if distinct.is_empty() {
            return Err(CfnError::NoRatings);
        }
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let (min, max) = (distinct[0], distinct[distinct.len() - 1]);
        if distinct.len() == 1 {
            // A single observed value carries no scale; widen by one unit.
            return RatingScale::new(min - 1.0, max, Some(1.0));
        }
        let step = distinct
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let on_grid = distinct.iter().all(|v| {
            let k = (v - min) / step;
            (k - k.round()).abs() < 1e-6
        });
        let levels = ((max - min) / step).round();
        if on_grid && levels <= 1000.0 {
            // snap so that (max - min) / step is an exact integer
            RatingScale::new(min, max, Some((max - min) / levels))
        } else {
            RatingScale::new(min, max, None)
        }
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min_rating, self.max_rating)
    }
}

/// Bidirectional mapping between raw dataset identifiers and dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMap {
    raw: Vec<String>,
    index: HashMap<String, u32>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_raw(raw: Vec<String>) -> Self {
        let index = raw
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i as u32))
            .collect();
        IdMap { raw, index }
    }

    /// Returns the index of `raw`, assigning the next free one if unseen.
    pub fn intern(&mut self, raw: &str) -> u32 {
        if let Some(&i) = self.index.get(raw) {
            return i;
        }
        let i = self.raw.len() as u32;
        self.raw.push(raw.to_owned());
        self.index.insert(raw.to_owned(), i);
        i
    }

    pub fn get(&self, raw: &str) -> Option<u32> {
        self.index.get(raw).copied()
    }

    pub fn raw(&self, index: usize) -> Option<&str> {
        self.raw.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw_ids(&self) -> &[String] {
        &self.raw
    }
}

/// Raw ↔ internal id maps for both axes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMaps {
    pub users: IdMap,
    pub items: IdMap,
}

impl IdMaps {
    pub fn axis(&self, axis: Axis) -> &IdMap {
        match axis {
            Axis::User => &self.users,
            Axis::Item => &self.items,
        }
    }
}
