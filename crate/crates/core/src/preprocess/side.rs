use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::{IdMap, TagMatrix};
use crate::error::{CfnError, Result};

/// Dense per-entity features: SVD columns first, then binary columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfoTable {
    n_entities: usize,
    dim: usize,
    svd_dim: usize,
    features: Vec<f64>,
}

impl SideInfoTable {
    pub fn new(n_entities: usize, dim: usize, svd_dim: usize, features: Vec<f64>) -> Result<Self> {
        if features.len() != n_entities * dim || svd_dim > dim {
            return Err(CfnError::Dimension(format!(
                "{} features for {n_entities} entities of width {dim} (svd part {svd_dim})",
                features.len()
            )));
        }
        if let Some(p) = features.iter().position(|v| !v.is_finite()) {
            return Err(CfnError::NonFinite(format!(
                "side information of entity {}",
                p / dim
            )));
        }
        Ok(SideInfoTable {
            n_entities,
            dim,
            svd_dim,
            features,
        })
    }

    /// A table with no columns.
    pub fn empty(n_entities: usize) -> Self {
        SideInfoTable {
            n_entities,
            dim: 0,
            svd_dim: 0,
            features: Vec::new(),
        }
    }

    /// 0/1 indicator columns from a tag matrix.
    pub fn from_binary(flags: &TagMatrix) -> Self {
        build_side_info(&SideInfoTable::empty(flags.n_entities()), flags)
            .expect("entity counts agree by construction")
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn svd_dim(&self) -> usize {
        self.svd_dim
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, entity: usize) -> &[f64] {
        &self.features[entity * self.dim..(entity + 1) * self.dim]
    }

    /// `entity_id,f0,f1,...` with raw entity ids.
    pub fn write_csv(&self, path: impl AsRef<Path>, ids: &IdMap) -> Result<()> {
        let path = path.as_ref();
        let io = |e| CfnError::io(path, e);
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        write!(out, "entity_id").map_err(io)?;
        for c in 0..self.dim {
            write!(out, ",f{c}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
        for e in 0..self.n_entities {
            let raw = ids
                .raw(e)
                .map(str::to_owned)
                .unwrap_or_else(|| e.to_string());
            write!(out, "{raw}").map_err(io)?;
            for v in self.row(e) {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Appends the binary columns of `binary_part` after the SVD columns.
pub fn build_side_info(svd_part: &SideInfoTable, binary_part: &TagMatrix) -> Result<SideInfoTable> {
    let n = svd_part.n_entities();
    if binary_part.n_entities() != n {
        return Err(CfnError::Dimension(format!(
            "svd part covers {n} entities, binary part {}",
            binary_part.n_entities()
        )));
    }
    let (k, b) = (svd_part.dim(), binary_part.n_tags());
    let dim = k + b;
    let mut features = vec![0.0; n * dim];
    for e in 0..n {
        features[e * dim..e * dim + k].copy_from_slice(svd_part.row(e));
    }
    for &(e, t, c) in binary_part.entries() {
        if c > 0 {
            features[e as usize * dim + k + t as usize] = 1.0;
        }
    }
    SideInfoTable::new(n, dim, svd_part.svd_dim(), features)
}
