use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{IdMaps, Rating, RatingMatrix, RatingScale};
use crate::error::{CfnError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingFormat {
    /// `UserID::MovieID::Rating::Timestamp`
    MovielensDat,
    /// Header line followed by `user,item,rating[,...]` records.
    Csv,
}

impl FromStr for RatingFormat {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens_dat" | "dat" => Ok(RatingFormat::MovielensDat),
            "csv" => Ok(RatingFormat::Csv),
            other => Err(CfnError::InvalidArgument(format!(
                "unknown rating format '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedRatings {
    pub matrix: RatingMatrix,
    pub scale: RatingScale,
    pub ids: IdMaps,
    /// Repeated (user, item) pairs; the last value won.
    pub duplicates: usize,
}

pub fn load_ratings(path: impl AsRef<Path>, format: RatingFormat) -> Result<LoadedRatings> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CfnError::io(path, e))?;
    parse_ratings(BufReader::new(file), format, path)
}

/// Parses ratings from any reader; `origin` is only used in error messages.
pub fn parse_ratings<R: Read>(
    reader: R,
    format: RatingFormat,
    origin: impl AsRef<Path>,
) -> Result<LoadedRatings> {
    let origin = origin.as_ref();
    let mut builder = Builder::default();
    match format {
        RatingFormat::MovielensDat => {
            let mut reader = BufReader::new(reader);
            let mut buf = Vec::new();
            let mut line_no = 0;
            loop {
                buf.clear();
                let n = reader
                    .read_until(b'\n', &mut buf)
                    .map_err(|e| CfnError::io(origin, e))?;
                if n == 0 {
                    break;
                }
                line_no += 1;
                // MovieLens files are latin-1; ids and ratings are ASCII anyway.
                let line = String::from_utf8_lossy(&buf);
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split("::").collect();
                if fields.len() < 3 {
                    return Err(parse_err(
                        origin,
                        line_no,
                        "expected UserID::MovieID::Rating",
                    ));
                }
                let value = parse_value(fields[2], origin, line_no)?;
                builder.push(fields[0], fields[1], value);
            }
        }
        RatingFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .trim(csv::Trim::All)
                .flexible(true)
                .from_reader(reader);
            let headers = rdr.headers()?.clone();
            let (cu, ci, cr) = csv_columns(&headers);
            for (k, record) in rdr.records().enumerate() {
                let line_no = k + 2;
                let record = record.map_err(|e| parse_err(origin, line_no, &e.to_string()))?;
                if record.len() == 1 && record[0].is_empty() {
                    continue;
                }
                let field = |c: usize| {
                    record
                        .get(c)
                        .ok_or_else(|| parse_err(origin, line_no, "expected user,item,rating"))
                };
                let value = parse_value(field(cr)?, origin, line_no)?;
                builder.push(field(cu)?, field(ci)?, value);
            }
        }
    }
    builder.finish()
}

fn csv_columns(headers: &csv::StringRecord) -> (usize, usize, usize) {
    let find = |names: &[&str], fallback: usize| {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
            .unwrap_or(fallback)
    };
    (
        find(&["user", "userid", "user_id"], 0),
        find(&["item", "itemid", "item_id", "movieid", "movie_id"], 1),
        find(&["rating", "value"], 2),
    )
}

fn parse_value(field: &str, origin: &Path, line: usize) -> Result<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(origin, line, &format!("bad rating '{field}'"))),
    }
}

fn parse_err(origin: &Path, line: usize, message: &str) -> CfnError {
    CfnError::Parse {
        path: origin.to_path_buf(),
        line,
        message: message.to_owned(),
    }
}

#[derive(Default)]
struct Builder {
    ids: IdMaps,
    entries: Vec<Rating>,
    seen: HashMap<(u32, u32), usize>,
    duplicates: usize,
}

impl Builder {
    fn push(&mut self, user: &str, item: &str, value: f64) {
        let user = self.ids.users.intern(user.trim());
        let item = self.ids.items.intern(item.trim());
        match self.seen.get(&(user, item)) {
            Some(&pos) => {
                self.entries[pos].value = value;
                self.duplicates += 1;
            }
            None => {
                self.seen.insert((user, item), self.entries.len());
                self.entries.push(Rating { user, item, value });
            }
        }
    }

    fn finish(self) -> Result<LoadedRatings> {
        if self.entries.is_empty() {
            return Err(CfnError::NoRatings);
        }
        if self.duplicates > 0 {
            log::warn!(
                "{} duplicate ratings, kept the last occurrence",
                self.duplicates
            );
        }
        let scale = RatingScale::infer(self.entries.iter().map(|r| r.value))?;
        let matrix = RatingMatrix::new(self.ids.users.len(), self.ids.items.len(), self.entries)?;
        Ok(LoadedRatings {
            matrix,
            scale,
            ids: self.ids,
            duplicates: self.duplicates,
        })
    }
}
