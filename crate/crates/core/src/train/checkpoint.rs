//! Binary checkpoint layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "CFNCKPT\0"
//! version    u32
//! header     u64 length + JSON (shape, config, preprocessor, epoch, loss curve)
//! W1, b1, W2, b2   each u64 count + count × f64
//! ```
//!
//! `W1` is stored column-major (`k` values per input unit), `W2` row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CfnModel, EpochRecord, TrainConfig, TrainState};
use crate::error::{CfnError, Result};
use crate::model::AutoencoderParams;
use crate::preprocess::Preprocessor;

const MAGIC: &[u8; 8] = b"CFNCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
    k: usize,
    p_in: usize,
    p_hidden: usize,
    config: TrainConfig,
    preprocessor: Preprocessor,
    epoch: usize,
    loss_curve: Vec<EpochRecord>,
}

pub fn write_checkpoint<W: Write>(mut out: W, state: &TrainState) -> std::io::Result<()> {
    let params = &state.model.params;
    let header = Header {
        n: params.n(),
        k: params.k(),
        p_in: params.p_in(),
        p_hidden: params.p_hidden(),
        config: state.model.config.clone(),
        preprocessor: state.model.preprocessor.clone(),
        epoch: state.epoch,
        loss_curve: state.loss_curve.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let (w1, w2) = params.weights();
    for block in [w1, params.b1(), w2, params.b2()] {
        out.write_all(&(block.len() as u64).to_le_bytes())?;
        for v in block {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<TrainState> {
    let bad = |m: &str| CfnError::Checkpoint(m.to_owned());
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|_| bad("truncated magic"))?;
    if &magic != MAGIC {
        return Err(bad("not a cfn checkpoint"));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != CHECKPOINT_VERSION {
        return Err(CfnError::Checkpoint(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let len = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut json = vec![0u8; len];
    input
        .read_exact(&mut json)
        .map_err(|_| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(&json)?;

    let mut blocks = Vec::with_capacity(4);
    for _ in 0..4 {
        let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
        let mut bytes = vec![0u8; count * 8];
        input
            .read_exact(&mut bytes)
            .map_err(|_| bad("truncated weights"))?;
        blocks.push(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect::<Vec<f64>>(),
        );
    }
    let b2 = blocks.pop().expect("four blocks");
    let w2 = blocks.pop().expect("four blocks");
    let b1 = blocks.pop().expect("four blocks");
    let w1 = blocks.pop().expect("four blocks");
    let params = AutoencoderParams::from_parts(
        (header.n, header.k, header.p_in, header.p_hidden),
        w1,
        b1,
        w2,
        b2,
    )?;
    Ok(TrainState {
        model: CfnModel {
            config: header.config,
            params,
            preprocessor: header.preprocessor,
        },
        epoch: header.epoch,
        loss_curve: header.loss_curve,
    })
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input
        .read_exact(&mut buf)
        .map_err(|_| CfnError::Checkpoint("truncated checkpoint".into()))?;
    Ok(buf)
}

pub fn save_checkpoint(path: impl AsRef<Path>, state: &TrainState) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
    write_checkpoint(BufWriter::new(file), state).map_err(|e| CfnError::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TrainState> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CfnError::io(path, e))?;
    read_checkpoint(BufReader::new(file))
}
