//! Model file: 8 magic bytes, `u32` LE format version, `u8` scalar-tag
//! length plus tag, `u64` LE payload length, then a JSON payload.

use std::path::Path;

use super::TrainedModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"CFMODEL\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn to_bytes<T: Scalar>(model: &TrainedModel<T>) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(model)?;
    let tag = T::NAME.as_bytes();
    let mut out = Vec::with_capacity(payload.len() + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(tag.len() as u8);
    out.extend_from_slice(tag);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn from_bytes<T: Scalar>(bytes: &[u8]) -> Result<TrainedModel<T>> {
    let corrupt = |m: &str| Error::CorruptFile(m.to_string());
    let mut at = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(at..at + n).ok_or_else(|| corrupt("truncated"))?;
        at += n;
        Ok(s)
    };
    if take(8)? != MAGIC {
        return Err(corrupt("bad magic bytes"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { expected: FORMAT_VERSION, found: version });
    }
    let tag_len = take(1)?[0] as usize;
    let tag = take(tag_len)?;
    if tag != T::NAME.as_bytes() {
        return Err(Error::CorruptFile(format!("model stored as {}, requested {}", String::from_utf8_lossy(tag), T::NAME)));
    }
    let len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
    let payload = take(len)?;
    if at != bytes.len() {
        return Err(corrupt("trailing bytes after payload"));
    }
    serde_json::from_slice(payload).map_err(|e| Error::CorruptFile(e.to_string()))
}

pub fn save_model<T: Scalar>(model: &TrainedModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model)?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<TrainedModel<T>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    from_bytes(&bytes)
}
