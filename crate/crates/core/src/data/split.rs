use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RatingMatrix;
use crate::error::{CfnError, Result};

/// Per-rating random train/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(CfnError::InvalidArgument(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }

    pub fn train_size(&self, n: usize) -> usize {
        ((self.train_fraction * n as f64).round() as usize).min(n)
    }
}

/// Shuffles entry positions with the seeded generator and sends the first
/// `round(fraction * n)` to train. Both halves keep the original entry order
/// and the full user/item index space.
///
/// For a fixed seed the permutation does not depend on the fraction, so train
/// sets for increasing fractions are nested.
pub fn split(ratings: &RatingMatrix, spec: SplitSpec) -> Result<(RatingMatrix, RatingMatrix)> {
    if ratings.is_empty() {
        return Err(CfnError::NoRatings);
    }
    SplitSpec::new(spec.train_fraction, spec.seed)?;
    let n = ratings.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut in_train = vec![false; n];
    for &p in &order[..spec.train_size(n)] {
        in_train[p] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, keep) in ratings.entries().iter().zip(&in_train) {
        if *keep {
            train.push(*r);
        } else {
            test.push(*r);
        }
    }
    Ok((ratings.with_entries(train)?, ratings.with_entries(test)?))
}

/// Keeps a seeded random `fraction` of the ratings.
pub fn subsample(ratings: &RatingMatrix, fraction: f64, seed: u64) -> Result<RatingMatrix> {
    split(ratings, SplitSpec::new(fraction, seed)?).map(|(kept, _)| kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Rating;

    fn grid(n_users: u32, n_items: u32) -> RatingMatrix {
        let entries = (0..n_users)
            .flat_map(|u| {
                (0..n_items).map(move |i| Rating {
                    user: u,
                    item: i,
                    value: ((u * 7 + i * 3) % 5 + 1) as f64,
                })
            })
            .collect();
        RatingMatrix::new(n_users as usize, n_items as usize, entries).unwrap()
    }

    #[test]
    fn ten_entries_ninety_percent() {
        let m = grid(2, 5);
        let (train, test) = split(&m, SplitSpec::new(0.9, 1).unwrap()).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        assert_eq!(train.n_users(), 2);
        assert_eq!(test.n_items(), 5);
    }

    #[test]
    fn same_seed_same_partition() {
        let m = grid(6, 7);
        let spec = SplitSpec::new(0.7, 42).unwrap();
        assert_eq!(split(&m, spec).unwrap(), split(&m, spec).unwrap());
        let other = split(&m, SplitSpec::new(0.7, 43).unwrap()).unwrap();
        assert_ne!(split(&m, spec).unwrap().0, other.0);
    }

    #[test]
    fn fraction_sweep_sizes_are_nested() {
        let m = grid(9, 10);
        let n = m.len();
        let mut previous: Option<RatingMatrix> = None;
        for step in 1..=9 {
            let f = step as f64 / 10.0;
            let (train, test) = split(&m, SplitSpec::new(f, 5).unwrap()).unwrap();
            // independent size rule: nearest integer to f * n
            let expected = (0..=n)
                .min_by(|&a, &b| {
                    (a as f64 - f * n as f64)
                        .abs()
                        .total_cmp(&(b as f64 - f * n as f64).abs())
                })
                .unwrap();
            assert_eq!(train.len(), expected, "fraction {f}");
            assert_eq!(train.len() + test.len(), n);
            if let Some(prev) = &previous {
                assert!(prev
                    .entries()
                    .iter()
                    .all(|r| train.get(r.user as usize, r.item as usize).is_some()));
            }
            previous = Some(train);
        }
    }

    #[test]
    fn rejects_bad_fraction_and_empty() {
        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(0.0, 0).is_err());
        let empty = RatingMatrix::new(1, 1, vec![]).unwrap();
        assert!(split(
            &empty,
            SplitSpec {
                train_fraction: 0.5,
                seed: 0
            }
        )
        .is_err());
    }
}
