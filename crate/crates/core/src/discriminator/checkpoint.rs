//! Parameter checkpoint: a 16-byte header of four little-endian `u32`s
//! (magic `b"SDCK"` read as bytes, format version, views, resolution)
//! followed by every parameter as a little-endian `f64` in
//! [`DiscParams`] layout order.

use std::fs;
use std::path::Path;

use super::DiscParams;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"SDCK";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn checkpoint_bytes(params: &DiscParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * params.values.len());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.views as u32).to_le_bytes());
    out.extend_from_slice(&(params.resolution as u32).to_le_bytes());
    for v in &params.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<DiscParams> {
    if bytes.len() < 16 || bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a discriminator checkpoint".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let (views, resolution) = (word(8) as usize, word(12) as usize);
    let body = &bytes[16..];
    if !body.len().is_multiple_of(8) {
        return Err(Error::Format(
            "checkpoint body is not a whole number of f64s".into(),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let params = DiscParams {
        views,
        resolution,
        values,
    };
    params
        .validate()
        .map_err(|e| Error::Format(format!("checkpoint: {e}")))?;
    Ok(params)
}

pub fn save_checkpoint(params: &DiscParams, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_bytes(params)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<DiscParams> {
    params_from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
