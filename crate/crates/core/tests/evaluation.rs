mod common;

use cfn::data::{split, Axis, Rating, RatingMatrix, RatingScale, SplitSpec};
use cfn::eval::{
    bias_baseline, cluster_rmse, improvement, recombine, rmse, FnPredictor, Predictor,
};
use proptest::prelude::*;
use rand::Rng;

fn random_5x5(seed: u64, density: f64) -> RatingMatrix {
    let mut r = common::rng(seed);
    let mut entries = Vec::new();
    for u in 0..5u32 {
        for i in 0..5u32 {
            if r.gen_bool(density) {
                entries.push(Rating {
                    user: u,
                    item: i,
                    value: r.gen_range(1..=5) as f64,
                });
            }
        }
    }
    if entries.is_empty() {
        entries.push(Rating {
            user: 0,
            item: 0,
            value: 3.0,
        });
    }
    RatingMatrix::new(5, 5, entries).unwrap()
}

fn scale() -> RatingScale {
    RatingScale::new(1.0, 5.0, Some(1.0)).unwrap()
}

#[test]
fn rmse_matches_double_loop() {
    for seed in 0..50 {
        let test = random_5x5(seed, 0.6);
        let f = |u: usize, i: usize| 1.0 + ((u * 7 + i * 3) % 9) as f64 * 0.5;
        let p = FnPredictor(|u: usize, i: usize| f(u, i));
        let (mut sum, mut count) = (0.0, 0usize);
        for u in 0..5 {
            for i in 0..5 {
                if let Some(v) = test.get(u, i) {
                    sum += (f(u, i) - v) * (f(u, i) - v);
                    count += 1;
                }
            }
        }
        let want = (sum / count as f64).sqrt();
        assert!((rmse(&p, &test).unwrap() - want).abs() <= 1e-12);
    }
}

#[test]
fn rmse_hand_values() {
    let test = RatingMatrix::new(
        1,
        2,
        vec![
            Rating {
                user: 0,
                item: 0,
                value: 3.0,
            },
            Rating {
                user: 0,
                item: 1,
                value: 5.0,
            },
        ],
    )
    .unwrap();
    assert_eq!(rmse(&FnPredictor(|_, _| 4.0), &test).unwrap(), 1.0);
    assert_eq!(
        rmse(&FnPredictor(|u, i| test.get(u, i).unwrap()), &test).unwrap(),
        0.0
    );
    let empty = RatingMatrix::new(1, 1, vec![]).unwrap();
    assert!(rmse(&FnPredictor(|_, _| 0.0), &empty).is_err());
}

#[test]
fn bias_baseline_matches_loop_means() {
    for seed in 0..50 {
        let train = random_5x5(seed, 0.5);
        for axis in [Axis::User, Axis::Item] {
            let base = bias_baseline(&train, axis, scale()).unwrap();
            let all: Vec<f64> = train.entries().iter().map(|r| r.value).collect();
            let global = all.iter().sum::<f64>() / all.len() as f64;
            for u in 0..5 {
                for i in 0..5 {
                    let e = if axis == Axis::User { u } else { i };
                    let (mut s, mut c) = (0.0, 0);
                    for o in 0..5 {
                        let v = if axis == Axis::User {
                            train.get(e, o)
                        } else {
                            train.get(o, e)
                        };
                        if let Some(v) = v {
                            s += v;
                            c += 1;
                        }
                    }
                    let want = if c == 0 { global } else { s / c as f64 };
                    assert!((base.predict(u, i).unwrap() - want).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn equal_counts_cluster_by_index() {
    // every item rated once in train, so clusters are index ranges
    let train = RatingMatrix::new(
        1,
        10,
        (0..10)
            .map(|i| Rating {
                user: 0,
                item: i,
                value: 3.0,
            })
            .collect(),
    )
    .unwrap();
    let test = train.clone();
    let c = cluster_rmse(&FnPredictor(|_, i| i as f64), &test, &train, Axis::Item, 5).unwrap();
    assert_eq!(c.len(), 5);
    assert!(c.iter().all(|c| c.n_entities == 2 && c.n_entries == 2));
    // cluster 0 holds items 0 and 1: errors 3 and 2
    assert!((c[0].rmse.unwrap() - (6.5f64).sqrt()).abs() < 1e-12);
    assert_eq!(c[0].label, "0.0-0.2");
}

#[test]
fn improvement_is_relative_percentage() {
    use cfn::eval::ClusterRmse;
    let mk = |r| ClusterRmse {
        label: "x".into(),
        rmse: r,
        n_entries: 1,
        n_entities: 1,
    };
    let imp = improvement(&[mk(Some(1.0)), mk(None)], &[mk(Some(0.99)), mk(Some(1.0))]);
    assert!((imp[0].unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(imp[1], None);
}

proptest! {
    #[test]
    fn clusters_recombine_to_global_rmse(seed in 0u64..1000, n_clusters in 1usize..7) {
        let full = random_5x5(seed, 0.8);
        prop_assume!(full.len() >= 2);
        let (train, test) = split(&full, SplitSpec::new(0.6, seed).unwrap()).unwrap();
        let p = FnPredictor(|u: usize, i: usize| 2.0 + 0.3 * u as f64 - 0.1 * i as f64);
        for by in [Axis::User, Axis::Item] {
            let c = cluster_rmse(&p, &test, &train, by, n_clusters).unwrap();
            prop_assert_eq!(c.iter().map(|c| c.n_entries).sum::<usize>(), test.len());
            let whole = rmse(&p, &test).unwrap();
            prop_assert!((recombine(&c).unwrap() - whole).abs() <= 1e-12);
        }
    }

    #[test]
    fn rmse_ignores_entry_order(seed in 0u64..1000) {
        let test = random_5x5(seed, 0.7);
        let mut shuffled = test.entries().to_vec();
        shuffled.reverse();
        let rev = RatingMatrix::new(5, 5, shuffled).unwrap();
        let p = FnPredictor(|u: usize, i: usize| (u + 2 * i) as f64 / 3.0);
        let (a, b) = (rmse(&p, &test).unwrap(), rmse(&p, &rev).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}
