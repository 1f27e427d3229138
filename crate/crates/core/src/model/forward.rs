use nalgebra::DMatrix;

use super::{AutoencoderParams, SparseVector};
use crate::error::{CfnError, Result};

/// Checks the input shape and returns the side vector (empty when disabled).
pub(crate) fn check_inputs<'a>(
    params: &AutoencoderParams,
    x: &SparseVector,
    side: Option<&'a [f64]>,
) -> Result<&'a [f64]> {
    if x.dim() != params.n {
        return Err(CfnError::Dimension(format!(
            "input of dim {} for an autoencoder of width {}",
            x.dim(),
            params.n
        )));
    }
    let expected = params.side_dim();
    match side {
        None if expected == 0 => Ok(&[]),
        Some(s) if s.len() == expected && expected > 0 => Ok(s),
        other => Err(CfnError::Dimension(format!(
            "side vector of length {} where {expected} is expected",
            other.map_or(0, <[f64]>::len)
        ))),
    }
}

/// `tanh(W1 · [x; side] + b1)` with unknown entries of `x` read as zero.
pub fn hidden_activation(
    params: &AutoencoderParams,
    x: &SparseVector,
    side: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let side = check_inputs(params, x, side)?;
    Ok(hidden_unchecked(params, x, side))
}

pub(crate) fn hidden_unchecked(
    params: &AutoencoderParams,
    x: &SparseVector,
    side: &[f64],
) -> Vec<f64> {
    let mut h = params.b1.clone();
    for (j, v) in x.iter() {
        axpy(v, params.w1_column(j), &mut h);
    }
    if params.p_in > 0 {
        for (s, &v) in side.iter().enumerate() {
            axpy(v, params.w1_column(params.n + s), &mut h);
        }
    }
    h.iter_mut().for_each(|a| *a = a.tanh());
    h
}

/// Pre-activation of output unit `j` given the hidden layer.
#[inline]
pub(crate) fn output_preactivation(
    params: &AutoencoderParams,
    hidden: &[f64],
    side: &[f64],
    j: usize,
) -> f64 {
    let row = params.w2_row(j);
    let mut z = params.b2[j] + dot(&row[..params.k], hidden);
    if params.p_hidden > 0 {
        z += dot(&row[params.k..], side);
    }
    z
}

/// `tanh(W2 · [h; side] + b2)` for every output unit.
pub fn forward(
    params: &AutoencoderParams,
    x: &SparseVector,
    side: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let side = check_inputs(params, x, side)?;
    let h = hidden_unchecked(params, x, side);
    Ok((0..params.n)
        .map(|j| output_preactivation(params, &h, side, j).tanh())
        .collect())
}

/// Writes the network as a non-linear factorization `forward(x) = tanh(V · u)`
/// with `V = [W2 | I_n]` and `u = [tanh(W1 x + b1); b2]`.
pub fn decompose(params: &AutoencoderParams, x: &SparseVector) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if params.side_dim() > 0 {
        return Err(CfnError::Unsupported(
            "factorization view of a network with side information".into(),
        ));
    }
    let side = check_inputs(params, x, None)?;
    let (n, k) = (params.n, params.k);
    let mut u = hidden_unchecked(params, x, side);
    u.extend_from_slice(&params.b2);
    let v = DMatrix::from_fn(n, k + n, |r, c| {
        if c < k {
            params.w2(r, c)
        } else if c - k == r {
            1.0
        } else {
            0.0
        }
    });
    Ok((u, v))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng, n: usize) -> SparseVector {
        let mut entries = Vec::new();
        for i in 0..n as u32 {
            if rng.gen_bool(0.5) {
                entries.push((i, rng.gen_range(-1.0..1.0)));
            }
        }
        SparseVector::new(n, entries).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = AutoencoderParams::zeros(5, 3, 0, 0).unwrap();
        let x = SparseVector::new(5, [(0, 0.5), (4, -0.25)]).unwrap();
        assert_eq!(forward(&p, &x, None).unwrap(), vec![0.0; 5]);
        let (u, v) = decompose(&p, &x).unwrap();
        assert_eq!(u, vec![0.0; 8]);
        assert_eq!(v.ncols(), 8);
    }

    #[test]
    fn plain_network_matches_dense_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut p = AutoencoderParams::init(6, 4, 0, 0, &mut rng).unwrap();
        p.b1.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        p.b2.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        let x = random_input(&mut rng, 6);
        let w1 = DMatrix::from_fn(4, 6, |r, c| p.w1(r, c));
        let w2 = DMatrix::from_fn(6, 4, |r, c| p.w2(r, c));
        let xd = DVector::from_vec(x.to_dense());
        let h = (w1 * xd + DVector::from_column_slice(p.b1())).map(f64::tanh);
        let out = (w2 * h + DVector::from_column_slice(p.b2())).map(f64::tanh);
        let got = forward(&p, &x, None).unwrap();
        for j in 0..6 {
            assert!((got[j] - out[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn side_injection_matches_term_by_term_expansion() {
        // n = 6, k = 3, P = 2 on both layers
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = AutoencoderParams::init(6, 3, 2, 2, &mut rng).unwrap();
        p.b1.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        p.b2.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        let x = random_input(&mut rng, 6);
        let side = [0.8, -0.3];
        let dense = x.to_dense();

        let mut u = [0.0; 3];
        for (h, slot) in u.iter_mut().enumerate() {
            let mut a = p.b1()[h];
            for (c, v) in dense.iter().chain(&side).enumerate() {
                a += p.w1(h, c) * v;
            }
            *slot = a.tanh();
        }
        let got = forward(&p, &x, Some(&side)).unwrap();
        for (j, &g) in got.iter().enumerate() {
            let latent: f64 = (0..3).map(|h| p.w2(j, h) * u[h]).sum();
            let user_bias: f64 = (0..2).map(|s| p.w2(j, 3 + s) * side[s]).sum();
            let expected = (latent + user_bias + p.b2()[j]).tanh();
            assert!((g - expected).abs() < 1e-15);
            assert!(g.abs() < 1.0);
        }
    }

    #[test]
    fn decomposition_reproduces_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut p = AutoencoderParams::init(9, 4, 0, 0, &mut rng).unwrap();
        p.b2.iter_mut().for_each(|b| *b = rng.gen_range(-1.0..1.0));
        let x = random_input(&mut rng, 9);
        let (u, v) = decompose(&p, &x).unwrap();
        assert_eq!(u.len(), 4 + 9);
        let rebuilt = (v * DVector::from_vec(u)).map(f64::tanh);
        let direct = forward(&p, &x, None).unwrap();
        for j in 0..9 {
            assert!((rebuilt[j] - direct[j]).abs() <= 1e-14);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = AutoencoderParams::zeros(4, 2, 3, 0).unwrap();
        let x = SparseVector::empty(4);
        assert!(forward(&p, &x, None).is_err());
        assert!(forward(&p, &x, Some(&[0.0; 2])).is_err());
        assert!(forward(&p, &x, Some(&[0.0; 3])).is_ok());
        assert!(forward(&p, &SparseVector::empty(5), Some(&[0.0; 3])).is_err());
        assert!(matches!(decompose(&p, &x), Err(CfnError::Unsupported(_))));
        let plain = AutoencoderParams::zeros(4, 2, 0, 0).unwrap();
        assert!(forward(&plain, &x, Some(&[1.0])).is_err());
    }
}
