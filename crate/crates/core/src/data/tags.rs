use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Axis, IdMap, IdMaps};
use crate::error::{CfnError, Result};

/// Genre vocabulary shared by the MovieLens releases. `Children's` (ML-1M)
/// and `Children` (ML-10M and later) are the same column.
pub const MOVIELENS_GENRES: [&str; 18] = [
    "Action",
    "Adventure",
    "Animation",
    "Children",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagFormat {
    /// `UserID::MovieID::Tag::Timestamp` or `userId,movieId,tag,timestamp`.
    MovielensTags,
    /// `MovieID::Title::Genre|Genre` or `movieId,title,genres`.
    GenreFlags,
    /// Header line followed by `a,b` friendship pairs between users.
    AdjacencyCsv,
}

impl TagFormat {
    /// The axis whose entities the rows of the resulting matrix describe.
    pub fn axis(self) -> Axis {
        match self {
            TagFormat::MovielensTags | TagFormat::GenreFlags => Axis::Item,
            TagFormat::AdjacencyCsv => Axis::User,
        }
    }

    /// Whether the matrix is fed as raw binary columns rather than reduced by SVD.
    pub fn is_binary(self) -> bool {
        matches!(self, TagFormat::GenreFlags)
    }
}

impl FromStr for TagFormat {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens_tags" | "tags" => Ok(TagFormat::MovielensTags),
            "genre_flags" | "genres" => Ok(TagFormat::GenreFlags),
            "adjacency_csv" | "adjacency" => Ok(TagFormat::AdjacencyCsv),
            other => Err(CfnError::InvalidArgument(format!(
                "unknown tag format '{other}'"
            ))),
        }
    }
}

/// Sparse entity × tag occurrence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagMatrix {
    n_entities: usize,
    n_tags: usize,
    /// `(entity, tag, count)` sorted by entity then tag, no repeated pairs, no zero counts.
    entries: Vec<(u32, u32, u32)>,
    tag_names: Vec<String>,
}

impl TagMatrix {
    /// Repeated `(entity, tag)` pairs are summed.
    pub fn new(
        n_entities: usize,
        n_tags: usize,
        triplets: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (e, t, c) in triplets {
            if e as usize >= n_entities || t as usize >= n_tags {
                return Err(CfnError::OutOfRange(format!(
                    "tag entry ({e}, {t}) outside {n_entities}x{n_tags}"
                )));
            }
            *acc.entry((e, t)).or_insert(0) += c;
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|((e, t), c)| (e, t, c))
            .collect();
        Ok(TagMatrix {
            n_entities,
            n_tags,
            entries,
            tag_names: (0..n_tags).map(|t| t.to_string()).collect(),
        })
    }

    pub fn with_tag_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_tags {
            return Err(CfnError::Dimension(format!(
                "{} tag names for {} tags",
                names.len(),
                self.n_tags
            )));
        }
        self.tag_names = names;
        Ok(self)
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn n_tags(&self) -> usize {
        self.n_tags
    }

    pub fn entries(&self) -> &[(u32, u32, u32)] {
        &self.entries
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tag_names
    }

    pub fn get(&self, entity: usize, tag: usize) -> u32 {
        self.entries
            .binary_search_by_key(&(entity as u32, tag as u32), |&(e, t, _)| (e, t))
            .map(|p| self.entries[p].2)
            .unwrap_or(0)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n_entities * self.n_tags];
        for &(e, t, c) in &self.entries {
            dense[e as usize * self.n_tags + t as usize] = c as f64;
        }
        dense
    }
}

#[derive(Debug, Clone)]
pub struct LoadedTags {
    pub matrix: TagMatrix,
    pub format: TagFormat,
    /// Rows whose entity is not in the id maps.
    pub dropped: usize,
}

pub fn load_tags(path: impl AsRef<Path>, format: TagFormat, ids: &IdMaps) -> Result<LoadedTags> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CfnError::io(path, e))?;
    parse_tags(BufReader::new(file), format, ids, path)
}

pub fn parse_tags<R: Read>(
    reader: R,
    format: TagFormat,
    ids: &IdMaps,
    origin: impl AsRef<Path>,
) -> Result<LoadedTags> {
    let origin = origin.as_ref();
    let records = read_records(reader, origin, format)?;
    let entities = ids.axis(format.axis());
    let mut dropped = 0;
    let mut triplets = Vec::new();

    let (n_tags, names) = match format {
        TagFormat::MovielensTags => {
            let mut vocab = IdMap::new();
            for (line, fields) in &records {
                if fields.len() < 3 {
                    return Err(parse_err(origin, *line, "expected UserID::MovieID::Tag"));
                }
                let Some(e) = entities.get(fields[1].trim()) else {
                    dropped += 1;
                    continue;
                };
                let tag = vocab.intern(fields[2].trim());
                triplets.push((e, tag, 1));
            }
            (vocab.len(), vocab.raw_ids().to_vec())
        }
        TagFormat::GenreFlags => {
            let mut vocab =
                IdMap::from_raw(MOVIELENS_GENRES.iter().map(|g| g.to_string()).collect());
            for (line, fields) in &records {
                if fields.len() < 3 {
                    return Err(parse_err(origin, *line, "expected MovieID::Title::Genres"));
                }
                let Some(e) = entities.get(fields[0].trim()) else {
                    dropped += 1;
                    continue;
                };
                let genres = &fields[fields.len() - 1];
                for genre in genres.split('|').map(str::trim) {
                    if genre.is_empty() || genre == "(no genres listed)" {
                        continue;
                    }
                    let genre = if genre == "Children's" {
                        "Children"
                    } else {
                        genre
                    };
                    let g = vocab.intern(genre);
                    triplets.push((e, g, 1));
                }
            }
            (vocab.len(), vocab.raw_ids().to_vec())
        }
        TagFormat::AdjacencyCsv => {
            for (line, fields) in &records {
                if fields.len() < 2 {
                    return Err(parse_err(origin, *line, "expected a,b"));
                }
                match (
                    entities.get(fields[0].trim()),
                    entities.get(fields[1].trim()),
                ) {
                    (Some(a), Some(b)) => {
                        triplets.push((a, b, 1));
                        triplets.push((b, a, 1));
                    }
                    _ => dropped += 1,
                }
            }
            (entities.len(), entities.raw_ids().to_vec())
        }
    };

    if dropped > 0 {
        log::warn!("{dropped} side-information rows reference unknown entities and were dropped");
    }
    let mut matrix = TagMatrix::new(entities.len(), n_tags, triplets)?.with_tag_names(names)?;
    if format != TagFormat::MovielensTags {
        // flags and friendships are presence indicators
        for entry in matrix.entries.iter_mut() {
            entry.2 = 1;
        }
    }
    Ok(LoadedTags {
        matrix,
        format,
        dropped,
    })
}

type Record = (usize, Vec<String>);

/// Splits the input into numbered field lists, accepting either `::`-separated
/// MovieLens lines or a CSV file with a header.
fn read_records<R: Read>(reader: R, origin: &Path, format: TagFormat) -> Result<Vec<Record>> {
    let mut bytes = Vec::new();
    BufReader::new(reader)
        .read_to_end(&mut bytes)
        .map_err(|e| CfnError::io(origin, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let first = text.lines().next().unwrap_or("");
    let is_dat = format != TagFormat::AdjacencyCsv && first.contains("::");

    if is_dat {
        let mut records = Vec::new();
        for (k, line) in text.as_bytes().lines().enumerate() {
            let line = line.map_err(|e| CfnError::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            records.push((k + 1, line.split("::").map(str::to_owned).collect()));
        }
        return Ok(records);
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| parse_err(origin, k + 2, &e.to_string()))?;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        records.push((k + 2, record.iter().map(str::to_owned).collect()));
    }
    Ok(records)
}

fn parse_err(origin: &Path, line: usize, message: &str) -> CfnError {
    CfnError::Parse {
        path: origin.to_path_buf(),
        line,
        message: message.to_owned(),
    }
}
