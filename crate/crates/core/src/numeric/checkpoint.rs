//! Checkpoint blob: an 8-byte magic, a little-endian `u64` header length,
//! the JSON header, then each tensor's values as little-endian `f64` in
//! header order.

use serde::{Deserialize, Serialize};

use super::{Param, ParamStore, Tensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"HGCKPT\x00\x01";
const FORMAT: &str = "hypergroup-checkpoint";
const DTYPE: &str = "f64-le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub trainable: bool,
    pub row_sparse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub dtype: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

/// Serializes `store` with the given config block.
pub fn write_checkpoint(store: &ParamStore, seed: u64, config_hash: &str, config: serde_json::Value) -> Result<Vec<u8>> {
    let header = CheckpointHeader {
        format: FORMAT.into(),
        version: 1,
        dtype: DTYPE.into(),
        seed,
        config_hash: config_hash.into(),
        config,
        tensors: store
            .iter()
            .map(|(_, p)| TensorEntry {
                name: p.name.clone(),
                shape: p.tensor.shape().to_vec(),
                trainable: p.trainable,
                row_sparse: p.row_sparse,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let payload: usize = store.iter().map(|(_, p)| p.tensor.len() * 8).sum();
    let mut out = Vec::with_capacity(16 + json.len() + payload);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, p) in store.iter() {
        for v in p.tensor.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<(CheckpointHeader, ParamStore)> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint (bad magic)"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(body)?;
    if header.format != FORMAT || header.dtype != DTYPE {
        return Err(bad("unsupported format or dtype"));
    }
    let mut cursor = 16 + len;
    let mut params = Vec::with_capacity(header.tensors.len());
    for entry in &header.tensors {
        let n: usize = entry.shape.iter().product();
        let raw = bytes
            .get(cursor..cursor + 8 * n)
            .ok_or_else(|| Error::Checkpoint(format!("payload for {:?} truncated", entry.name)))?;
        cursor += 8 * n;
        let values: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Checkpoint(format!("tensor {:?} holds non-finite values", entry.name)));
        }
        params.push(Param {
            name: entry.name.clone(),
            tensor: Tensor::new(entry.shape.clone(), values)?,
            trainable: entry.trainable,
            row_sparse: entry.row_sparse,
        });
    }
    if cursor != bytes.len() {
        return Err(bad("trailing bytes after payload"));
    }
    Ok((header, ParamStore::from_params(params)))
}
