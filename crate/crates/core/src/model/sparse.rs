use rand::Rng;

use crate::error::{CfnError, Result};

/// An incomplete vector: known `(index, value)` pairs, everything else unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Entries must have strictly increasing indices below `dim` and values in `[-1, 1]`.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let (indices, values): (Vec<u32>, Vec<f64>) = entries.into_iter().unzip();
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(CfnError::InvalidArgument(format!(
                "sparse indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= dim {
                return Err(CfnError::OutOfRange(format!(
                    "index {last} in a vector of dim {dim}"
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || v.abs() > 1.0 + 1e-12) {
            return Err(CfnError::InvalidArgument(format!(
                "sparse value {v} outside [-1, 1]"
            )));
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.indices
            .binary_search(&(index as u32))
            .ok()
            .map(|p| self.values[p])
    }

    /// Unknown entries as zeros.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            dense[i] = v;
        }
        dense
    }
}

/// Indices of known entries hidden from the network input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorruptionMask {
    indices: Vec<u32>,
}

impl CorruptionMask {
    pub fn new(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        CorruptionMask { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&(index as u32)).is_ok()
    }
}

/// Hides `round(mask_ratio · |known|)` known entries, drawn uniformly
/// without replacement. The corrupted vector simply omits them, so they are
/// fed to the network as zeros.
pub fn corrupt<R: Rng + ?Sized>(
    x: &SparseVector,
    mask_ratio: f64,
    rng: &mut R,
) -> Result<(SparseVector, CorruptionMask)> {
    if !(0.0..1.0).contains(&mask_ratio) {
        return Err(CfnError::InvalidArgument(format!(
            "mask ratio must lie in [0, 1), got {mask_ratio}"
        )));
    }
    let count = (mask_ratio * x.len() as f64).round() as usize;
    if count == 0 {
        return Ok((x.clone(), CorruptionMask::default()));
    }
    let mut hidden = vec![false; x.len()];
    for p in rand::seq::index::sample(rng, x.len(), count) {
        hidden[p] = true;
    }
    let mut kept = SparseVector::empty(x.dim);
    let mut masked = Vec::with_capacity(count);
    for (p, (&i, &v)) in x.indices.iter().zip(&x.values).enumerate() {
        if hidden[p] {
            masked.push(i);
        } else {
            kept.indices.push(i);
            kept.values.push(v);
        }
    }
    Ok((kept, CorruptionMask { indices: masked }))
}
