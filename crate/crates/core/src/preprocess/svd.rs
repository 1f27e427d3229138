use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SideInfoTable;
use crate::data::TagMatrix;
use crate::error::Result;

const OVERSAMPLE: usize = 10;
const POWER_ITERATIONS: usize = 4;
const SKETCH_SEED: u64 = 0x5eed_7a95;

/// Leading singular triplets (left vectors and values) of a sparse matrix.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `n_entities × rank`, orthonormal columns.
    pub left: DMatrix<f64>,
    /// Descending.
    pub values: Vec<f64>,
}

/// Randomized range finder with power iterations, followed by an exact SVD
/// of the small projected matrix. When the sketch width reaches
/// `min(rows, cols)` the captured range is the whole column space and the
/// result is exact up to rounding.
///
/// Each left vector is signed so that its largest-magnitude entry is positive.
pub fn truncated_svd(tags: &TagMatrix, rank: usize) -> TruncatedSvd {
    let (m, n) = (tags.n_entities(), tags.n_tags());
    let full = m.min(n);
    let rank = rank.min(full);
    if rank == 0 || tags.entries().is_empty() {
        return TruncatedSvd {
            left: DMatrix::zeros(m, rank),
            values: vec![0.0; rank],
        };
    }
    let width = (rank + OVERSAMPLE).min(full);

    let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
    let omega = DMatrix::from_fn(n, width, |_, _| rng.gen_range(-1.0..1.0));
    let mut q = orthonormalize(mul(tags, &omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormalize(mul_transpose(tags, &q));
        q = orthonormalize(mul(tags, &z));
    }
    // B = Qᵀ T, computed as (Tᵀ Q)ᵀ
    let b = mul_transpose(tags, &q).transpose();
    let svd = b.svd(true, false);
    let u_small = svd.u.expect("left vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(rank);

    let mut left = DMatrix::zeros(m, rank);
    let mut values = Vec::with_capacity(rank);
    for (c, &src) in order.iter().enumerate() {
        let mut col = &q * u_small.column(src);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            col.neg_mut();
        }
        left.set_column(c, &col);
        values.push(svd.singular_values[src]);
    }
    TruncatedSvd { left, values }
}

/// `Y = P_{:, ..k} · D_{..k}^{1/2}` from `T = P D Qᵀ`, one row per entity.
/// Columns beyond the numerical rank of `T` are zero.
pub fn svd_embed(tags: &TagMatrix, k_prime: usize) -> Result<SideInfoTable> {
    let n = tags.n_entities();
    let svd = truncated_svd(tags, k_prime);
    let top = svd.values.first().copied().unwrap_or(0.0);
    let tol = top * 1e-12 * (n.max(tags.n_tags()) as f64);
    let kept = svd.values.iter().take_while(|&&s| s > tol).count();
    if kept < k_prime {
        log::warn!("tag matrix has rank {kept} < {k_prime}; padding with zero columns");
    }
    let mut features = vec![0.0; n * k_prime];
    for c in 0..kept {
        let root = svd.values[c].sqrt();
        for e in 0..n {
            features[e * k_prime + c] = svd.left[(e, c)] * root;
        }
    }
    SideInfoTable::new(n, k_prime, k_prime, features)
}

fn mul(tags: &TagMatrix, dense: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(tags.n_entities(), dense.ncols());
    for c in 0..dense.ncols() {
        let src = dense.column(c);
        let mut dst = out.column_mut(c);
        for &(e, t, count) in tags.entries() {
            dst[e as usize] += count as f64 * src[t as usize];
        }
    }
    out
}

fn mul_transpose(tags: &TagMatrix, dense: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(tags.n_tags(), dense.ncols());
    for c in 0..dense.ncols() {
        let src = dense.column(c);
        let mut dst = out.column_mut(c);
        for &(e, t, count) in tags.entries() {
            dst[t as usize] += count as f64 * src[e as usize];
        }
    }
    out
}

fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    a.qr().q()
}
