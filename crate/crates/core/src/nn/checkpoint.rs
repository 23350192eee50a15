//! Binary parameter checkpoints.
//!
//! Layout: 8-byte magic, `u32` format version, `u64` header length, the JSON
//! header, then every parameter as a little-endian `f64` in layout order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::params::{ParamSlot, ParamVector, Params};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"MELCKPT\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub count: usize,
    pub layout: Vec<ParamSlot>,
    /// Model configuration the parameters belong to.
    pub model: Value,
}

pub fn encode<P: Params + ?Sized>(model: &P, meta: Value) -> Result<Vec<u8>> {
    let params = ParamVector::of(model);
    let header = CheckpointHeader {
        version: FORMAT_VERSION,
        count: params.values.len(),
        layout: params.layout,
        model: meta,
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(20 + header_bytes.len() + 8 * header.count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    for v in &params.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(CheckpointHeader, Vec<f64>)> {
    let bad = |msg: &str| Error::Data(format!("checkpoint: {msg}"));
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = bytes
        .get(20..20 + header_len)
        .ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(body)?;
    let data = &bytes[20 + header_len..];
    if data.len() != 8 * header.count {
        return Err(bad(&format!(
            "expected {} parameters, found {} bytes",
            header.count,
            data.len()
        )));
    }
    let layout_total: usize = header.layout.iter().map(|s| s.len).sum();
    if layout_total != header.count {
        return Err(bad("layout does not sum to parameter count"));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, values))
}

pub fn save<P: Params + ?Sized>(model: &P, meta: Value, path: &Path) -> Result<()> {
    let bytes = encode(model, meta)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(CheckpointHeader, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Loads values into a model whose layout must match the stored one.
pub fn restore_into<P: Params + ?Sized>(model: &mut P, header: &CheckpointHeader, values: Vec<f64>) -> Result<()> {
    ParamVector {
        layout: header.layout.clone(),
        values,
    }
    .apply_to(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::DenseLayer;

    #[test]
    fn round_trip_preserves_bits() {
        let layer = DenseLayer::xavier(5, 3, 42);
        let bytes = encode(&layer, serde_json::json!({"kind": "dense"})).unwrap();
        let (header, values) = decode(&bytes).unwrap();
        assert_eq!(header.model["kind"], "dense");
        let mut restored = DenseLayer::zeros(5, 3);
        restore_into(&mut restored, &header, values).unwrap();
        assert_eq!(restored, layer);
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let layer = DenseLayer::xavier(5, 3, 42);
        let bytes = encode(&layer, Value::Null).unwrap();
        let (header, values) = decode(&bytes).unwrap();
        let mut other = DenseLayer::zeros(3, 5);
        assert!(restore_into(&mut other, &header, values).is_err());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = encode(&DenseLayer::zeros(2, 2), Value::Null).unwrap();
        assert!(decode(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode(b"garbage").is_err());
    }
}
