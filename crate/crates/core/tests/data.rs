mod common;

use std::collections::HashMap;

use cfn::data::{split, subsample, Axis, Rating, RatingMatrix, SplitSpec};
use proptest::prelude::*;

fn matrix(nu: usize, ni: usize, cells: &[Option<u8>]) -> Option<RatingMatrix> {
    let entries: Vec<Rating> = cells
        .iter()
        .enumerate()
        .filter_map(|(p, c)| {
            c.map(|v| Rating {
                user: (p / ni) as u32,
                item: (p % ni) as u32,
                value: v as f64,
            })
        })
        .collect();
    (!entries.is_empty()).then(|| RatingMatrix::new(nu, ni, entries).unwrap())
}

fn matrices() -> impl Strategy<Value = RatingMatrix> {
    (1usize..9, 1usize..9)
        .prop_flat_map(|(nu, ni)| {
            proptest::collection::vec(proptest::option::of(1u8..=5), nu * ni)
                .prop_map(move |c| (nu, ni, c))
        })
        .prop_filter_map("nonempty", |(nu, ni, c)| matrix(nu, ni, &c))
}

fn key(r: &Rating) -> (u32, u32, u64) {
    (r.user, r.item, r.value.to_bits())
}

fn indices_consistent(m: &RatingMatrix) -> bool {
    let by_entry: HashMap<(u32, u32), f64> = m
        .entries()
        .iter()
        .map(|r| ((r.user, r.item), r.value))
        .collect();
    let rows_ok = (0..m.n_users()).all(|u| {
        m.row(u).windows(2).all(|w| w[0].0 < w[1].0)
            && m.row(u)
                .iter()
                .all(|&(i, v)| by_entry.get(&(u as u32, i)) == Some(&v))
    });
    let cols_ok = (0..m.n_items()).all(|i| {
        m.col(i).windows(2).all(|w| w[0].0 < w[1].0)
            && m.col(i)
                .iter()
                .all(|&(u, v)| by_entry.get(&(u, i as u32)) == Some(&v))
    });
    let total: usize = (0..m.n_users()).map(|u| m.row(u).len()).sum();
    let total_c: usize = (0..m.n_items()).map(|i| m.col(i).len()).sum();
    rows_ok && cols_ok && total == m.len() && total_c == m.len()
}

proptest! {
    #[test]
    fn split_is_an_exact_partition(m in matrices(), f in 0.05f64..0.95, seed: u64) {
        let (tr, te) = split(&m, SplitSpec::new(f, seed).unwrap()).unwrap();
        prop_assert_eq!(tr.len(), ((f * m.len() as f64).round() as usize).min(m.len()));
        let mut joined: Vec<_> = tr.entries().iter().chain(te.entries()).map(key).collect();
        let mut orig: Vec<_> = m.entries().iter().map(key).collect();
        joined.sort_unstable();
        orig.sort_unstable();
        prop_assert_eq!(joined, orig);
        prop_assert_eq!((tr.n_users(), tr.n_items()), (m.n_users(), m.n_items()));
        prop_assert!(indices_consistent(&m) && indices_consistent(&tr) && indices_consistent(&te));
    }

    #[test]
    fn subsample_keeps_a_subset(m in matrices(), f in 0.05f64..0.95, seed: u64) {
        let s = subsample(&m, f, seed).unwrap();
        prop_assert!(s.entries().iter().all(|r| m.get(r.user as usize, r.item as usize) == Some(r.value)));
        prop_assert!(indices_consistent(&s));
    }
}

#[test]
fn nested_sizes_over_fraction_sweep() {
    let cells: Vec<Option<u8>> = (0..90).map(|p| Some((p % 5 + 1) as u8)).collect();
    let m = matrix(9, 10, &cells).unwrap();
    let mut previous: Vec<(u32, u32)> = Vec::new();
    for tenth in 1..10 {
        let f = tenth as f64 / 10.0;
        let (tr, _) = split(&m, SplitSpec::new(f, 42).unwrap()).unwrap();
        assert_eq!(tr.len(), 9 * tenth);
        let now: Vec<(u32, u32)> = tr.entries().iter().map(|r| (r.user, r.item)).collect();
        assert!(previous.iter().all(|p| now.contains(p)));
        previous = now;
    }
}

#[test]
fn counts_follow_axis() {
    let m = matrix(2, 3, &[Some(1), None, Some(2), None, None, Some(3)]).unwrap();
    assert_eq!(m.counts(Axis::User), vec![2, 1]);
    assert_eq!(m.counts(Axis::Item), vec![1, 0, 2]);
}
