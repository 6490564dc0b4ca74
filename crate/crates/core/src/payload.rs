//! The transmitted artifact: a full-precision real plane plus metadata,
//! with a fixed little-endian binary layout.

use crate::error::{FlepError, Result};
use crate::image::RealPlane;

pub const PAYLOAD_MAGIC: &[u8; 4] = b"FLEP";
pub const PAYLOAD_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedPayload {
    pub plane: RealPlane,
    pub key_id: String,
    pub format_version: u16,
}

impl EncryptedPayload {
    pub fn new(plane: RealPlane, key_id: String) -> Self {
        Self {
            plane,
            key_id,
            format_version: PAYLOAD_VERSION,
        }
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }
}

/// Layout: "FLEP" | version u16 | width u32 | height u32 |
/// key_id length u16 + UTF-8 bytes | width*height f64 values. All little endian.
pub fn serialize_payload(payload: &EncryptedPayload) -> Vec<u8> {
    let plane = &payload.plane;
    let key_bytes = payload.key_id.as_bytes();
    let mut out =
        Vec::with_capacity(4 + 2 + 4 + 4 + 2 + key_bytes.len() + 8 * plane.values().len());
    out.extend_from_slice(PAYLOAD_MAGIC);
    out.extend_from_slice(&payload.format_version.to_le_bytes());
    out.extend_from_slice(&(plane.width() as u32).to_le_bytes());
    out.extend_from_slice(&(plane.height() as u32).to_le_bytes());
    out.extend_from_slice(&(key_bytes.len() as u16).to_le_bytes());
    out.extend_from_slice(key_bytes);
    for v in plane.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn deserialize_payload(data: &[u8]) -> Result<EncryptedPayload> {
    let mut pos = 0;
    let magic = take(data, &mut pos, 4)?;
    if magic != PAYLOAD_MAGIC {
        return Err(FlepError::PayloadFormat("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(data, &mut pos, 2)?.try_into().unwrap());
    if version != PAYLOAD_VERSION {
        return Err(FlepError::PayloadFormat(format!(
            "unsupported version {version}"
        )));
    }
    let width = u32::from_le_bytes(take(data, &mut pos, 4)?.try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(take(data, &mut pos, 4)?.try_into().unwrap()) as usize;
    let key_len = u16::from_le_bytes(take(data, &mut pos, 2)?.try_into().unwrap()) as usize;
    let key_id = String::from_utf8(take(data, &mut pos, key_len)?.to_vec())
        .map_err(|_| FlepError::PayloadFormat("key id is not UTF-8".into()))?;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| FlepError::PayloadFormat("dimension overflow".into()))?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let bytes = take(data, &mut pos, 8)?;
        values.push(f64::from_le_bytes(bytes.try_into().unwrap()));
    }
    if pos != data.len() {
        return Err(FlepError::PayloadFormat(format!(
            "{} trailing bytes",
            data.len() - pos
        )));
    }
    let plane = RealPlane::new(width, height, values)?;
    Ok(EncryptedPayload {
        plane,
        key_id,
        format_version: version,
    })
}

fn take<'a>(data: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = pos
        .checked_add(n)
        .filter(|&e| e <= data.len())
        .ok_or_else(|| FlepError::PayloadFormat("truncated payload".into()))?;
    let slice = &data[*pos..end];
    *pos = end;
    Ok(slice)
}
