//! Seeded synthetic rating data with MovieLens-like shape: a low-rank
//! preference structure, long-tailed user activity and item popularity, 1–5
//! integer ratings, and genre flags derived from the item factors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{IdMap, IdMaps, LoadedRatings, Rating, RatingMatrix, RatingScale, TagMatrix};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_users: usize,
    pub n_items: usize,
    pub rank: usize,
    pub min_per_user: usize,
    pub mean_per_user: usize,
    pub n_genres: usize,
    /// Standard deviation of the rating noise before rounding.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 600,
            n_items: 400,
            rank: 8,
            min_per_user: 10,
            mean_per_user: 40,
            n_genres: 18,
            noise: 0.5,
            seed: 0,
        }
    }
}

pub struct SynthData {
    pub ratings: LoadedRatings,
    /// Item × genre 0/1 flags.
    pub genres: TagMatrix,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale_f = 1.0 / (spec.rank as f64).sqrt();
    let users: Vec<Vec<f64>> = (0..spec.n_users)
        .map(|_| (0..spec.rank).map(|_| normal(&mut rng) * scale_f).collect())
        .collect();
    let items: Vec<Vec<f64>> = (0..spec.n_items)
        .map(|_| (0..spec.rank).map(|_| normal(&mut rng) * scale_f).collect())
        .collect();
    let user_bias: Vec<f64> = (0..spec.n_users).map(|_| 0.4 * normal(&mut rng)).collect();
    let item_bias: Vec<f64> = (0..spec.n_items).map(|_| 0.5 * normal(&mut rng)).collect();

    // popularity: Zipf-like weights in a random item order, nudged by quality
    let popularity: Vec<f64> = (0..spec.n_items)
        .map(|i| (1.0 / ((i + 1) as f64).powf(0.9)) * (0.5 * item_bias[i]).exp())
        .collect();
    let picker = WeightedIndex::new(&popularity).expect("positive weights");

    let mut entries = Vec::new();
    let mut taken = vec![false; spec.n_items];
    for u in 0..spec.n_users {
        let extra = (spec.mean_per_user.saturating_sub(spec.min_per_user)) as f64;
        let count =
            spec.min_per_user + (extra * (-(rng.gen_range(f64::EPSILON..1.0f64)).ln())) as usize;
        let count = count.min(spec.n_items * 3 / 4);
        let mut chosen = Vec::with_capacity(count);
        while chosen.len() < count {
            let i = picker.sample(&mut rng);
            if !taken[i] {
                taken[i] = true;
                chosen.push(i);
            }
        }
        for &i in &chosen {
            taken[i] = false;
            let affinity: f64 = users[u].iter().zip(&items[i]).map(|(a, b)| a * b).sum();
            let raw =
                3.6 + user_bias[u] + item_bias[i] + 1.2 * affinity + spec.noise * normal(&mut rng);
            entries.push(Rating {
                user: u as u32,
                item: i as u32,
                value: raw.round().clamp(1.0, 5.0),
            });
        }
    }

    let mut genre_flags = Vec::new();
    let directions: Vec<Vec<f64>> = (0..spec.n_genres)
        .map(|_| (0..spec.rank).map(|_| normal(&mut rng)).collect())
        .collect();
    for (i, v) in items.iter().enumerate() {
        for (g, d) in directions.iter().enumerate() {
            let s: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
            if s > 0.6 {
                genre_flags.push((i as u32, g as u32, 1));
            }
        }
    }

    let ids = IdMaps {
        users: IdMap::from_raw((0..spec.n_users).map(|u| format!("u{u}")).collect()),
        items: IdMap::from_raw((0..spec.n_items).map(|i| format!("i{i}")).collect()),
    };
    let matrix = RatingMatrix::new(spec.n_users, spec.n_items, entries)?;
    let genres = TagMatrix::new(spec.n_items, spec.n_genres, genre_flags)?;
    Ok(SynthData {
        ratings: LoadedRatings {
            matrix,
            scale: RatingScale::new(1.0, 5.0, Some(1.0))?,
            ids,
            duplicates: 0,
        },
        genres,
    })
}
