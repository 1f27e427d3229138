use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{load_ratings, IdMaps, LoadedRatings, RatingFormat, RatingMatrix};
use crate::error::{CfnError, Result};

/// Writes `user,item,rating` with raw ids in entry order. Floats use the
/// shortest representation that parses back to the same value, so reading the
/// file again reproduces the matrix, its id maps and its entry order exactly.
pub fn write_ratings_csv(
    path: impl AsRef<Path>,
    matrix: &RatingMatrix,
    ids: &IdMaps,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| CfnError::io(path, e);
    writeln!(out, "user,item,rating").map_err(io)?;
    for r in matrix.entries() {
        let user = ids
            .users
            .raw(r.user as usize)
            .ok_or_else(|| missing("user", r.user))?;
        let item = ids
            .items
            .raw(r.item as usize)
            .ok_or_else(|| missing("item", r.item))?;
        writeln!(out, "{},{},{}", quote(user), quote(item), r.value).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_ratings_csv(path: impl AsRef<Path>) -> Result<LoadedRatings> {
    load_ratings(path, RatingFormat::Csv)
}

fn missing(kind: &str, index: u32) -> CfnError {
    CfnError::OutOfRange(format!("{kind} {index} has no raw id"))
}

fn quote(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_ratings;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn load_dump_load_round_trip(
            raw in prop::collection::vec((0u32..20, 0u32..15, -1000i32..1000), 1..60)
        ) {
            let mut text = String::from("user,item,rating\n");
            for (u, i, v) in &raw {
                text.push_str(&format!("u{u},\"it,{i}\",{}\n", *v as f64 / 7.0));
            }
            let first = parse_ratings(text.as_bytes(), RatingFormat::Csv, "in.csv").unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("ratings.csv");
            write_ratings_csv(&path, &first.matrix, &first.ids).unwrap();
            let second = read_ratings_csv(&path).unwrap();
            prop_assert_eq!(&first.matrix, &second.matrix);
            prop_assert_eq!(&first.ids, &second.ids);
            prop_assert_eq!(first.scale, second.scale);
        }
    }
}
