#![allow(dead_code, clippy::needless_range_loop)]

use cfn::data::TagMatrix;
use cfn::model::{
    corrupt, loss, loss_and_gradients, AutoencoderParams, CorruptionMask, LossWeights, SparseVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small random network, input vector, corruption and side vector.
pub struct Instance {
    pub params: AutoencoderParams,
    pub x: SparseVector,
    pub x_tilde: SparseVector,
    pub mask: CorruptionMask,
    pub side: Option<Vec<f64>>,
}

pub fn random_params(
    r: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    p_in: usize,
    p_hidden: usize,
) -> AutoencoderParams {
    let mut params = AutoencoderParams::zeros(n, k, p_in, p_hidden).unwrap();
    let scale = r.gen_range(0.2..1.2);
    for c in 0..n + p_in {
        for h in 0..k {
            *params.w1_mut(h, c) = r.gen_range(-scale..scale);
        }
    }
    for j in 0..n {
        for h in 0..k + p_hidden {
            *params.w2_mut(j, h) = r.gen_range(-scale..scale);
        }
    }
    params
        .b1_mut()
        .iter_mut()
        .for_each(|b| *b = r.gen_range(-0.5..0.5));
    params
        .b2_mut()
        .iter_mut()
        .for_each(|b| *b = r.gen_range(-0.5..0.5));
    params
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> SparseVector {
    let known = r.gen_range(1..=n);
    let mut idx: Vec<u32> = rand::seq::index::sample(r, n, known)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    idx.sort_unstable();
    let entries: Vec<(u32, f64)> = idx
        .into_iter()
        .map(|i| (i, r.gen_range(-1.0..=1.0)))
        .collect();
    SparseVector::new(n, entries).unwrap()
}

/// `side_mode`: 0 none, 1 input, 2 hidden, 3 both.
pub fn instance(seed: u64, side_mode: u8, mask_ratio: f64) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(2..10);
    let k = r.gen_range(1..6);
    let p = if side_mode == 0 { 0 } else { r.gen_range(1..4) };
    let p_in = if side_mode & 1 == 1 { p } else { 0 };
    let p_hidden = if side_mode & 2 == 2 { p } else { 0 };
    let params = random_params(&mut r, n, k, p_in, p_hidden);
    let x = random_vector(&mut r, n);
    let (x_tilde, mask) = corrupt(&x, mask_ratio, &mut r).unwrap();
    let side = (p > 0).then(|| (0..p).map(|_| r.gen_range(-1.0..1.0)).collect());
    Instance {
        params,
        x,
        x_tilde,
        mask,
        side,
    }
}

/// Straight-line evaluation of the network from its definition, written
/// independently of the library's forward pass.
pub fn reference_forward(
    p: &AutoencoderParams,
    x: &SparseVector,
    side: Option<&[f64]>,
) -> Vec<f64> {
    let (n, k) = (p.n(), p.k());
    let dense = x.to_dense();
    let s = side.unwrap_or(&[]);
    let mut hidden = vec![0.0; k];
    for h in 0..k {
        let mut z = p.b1()[h];
        for c in 0..n {
            z += p.w1(h, c) * dense[c];
        }
        for c in 0..p.p_in() {
            z += p.w1(h, n + c) * s[c];
        }
        hidden[h] = z.tanh();
    }
    (0..n)
        .map(|j| {
            let mut z = p.b2()[j];
            for h in 0..k {
                z += p.w2(j, h) * hidden[h];
            }
            for c in 0..p.p_hidden() {
                z += p.w2(j, k + c) * s[c];
            }
            z.tanh()
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

const STEP: f64 = 1e-5;

/// Enumerates every parameter as (name, getter/setter) through the public
/// accessors.
fn for_each_param(p: &AutoencoderParams, mut f: impl FnMut(&str, usize, usize)) {
    for c in 0..p.n() + p.p_in() {
        for h in 0..p.k() {
            f("w1", h, c);
        }
    }
    for h in 0..p.k() {
        f("b1", h, 0);
    }
    for j in 0..p.n() {
        for h in 0..p.k() + p.p_hidden() {
            f("w2", j, h);
        }
        f("b2", j, 0);
    }
}

fn slot<'a>(p: &'a mut AutoencoderParams, name: &str, a: usize, b: usize) -> &'a mut f64 {
    match name {
        "w1" => p.w1_mut(a, b),
        "w2" => p.w2_mut(a, b),
        "b1" => &mut p.b1_mut()[a],
        _ => &mut p.b2_mut()[a],
    }
}

pub fn max_relative_error(inst: &Instance, w: LossWeights) -> f64 {
    let side = inst.side.as_deref();
    let (_, g) =
        loss_and_gradients(&inst.params, &inst.x, &inst.x_tilde, &inst.mask, side, w).unwrap();
    let mut worst: f64 = 0.0;
    for_each_param(&inst.params, |name, a, b| {
        let analytic = match name {
            "w1" => g.w1(a, b),
            "w2" => g.w2(a, b),
            "b1" => g.b1()[a],
            _ => g.b2()[a],
        };
        let mut p = inst.params.clone();
        let base = *slot(&mut p, name, a, b);
        *slot(&mut p, name, a, b) = base + STEP;
        let up = loss(&p, &inst.x, &inst.x_tilde, &inst.mask, side, w).unwrap();
        *slot(&mut p, name, a, b) = base - STEP;
        let down = loss(&p, &inst.x, &inst.x_tilde, &inst.mask, side, w).unwrap();
        let numeric = (up - down) / (2.0 * STEP);
        // floor keeps exact zeros (unknown inputs, untouched rows) from
        // dividing by nothing
        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / denom);
    });
    worst
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn random_tags(seed: u64, rows: usize, cols: usize) -> TagMatrix {
    let mut r = rng(seed);
    let mut triplets = Vec::new();
    for e in 0..rows {
        for t in 0..cols {
            if r.gen_bool(0.35) {
                triplets.push((e as u32, t as u32, r.gen_range(1..6)));
            }
        }
    }
    TagMatrix::new(rows, cols, triplets).unwrap()
}
