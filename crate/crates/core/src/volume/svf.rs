//! SVF container: `"SVF1"`, a little-endian `u32` header length, a UTF-8
//! JSON header, then each field's little-endian `f32` samples in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Field, FieldKind, VolumeGrid};
use crate::{Error, Result, Vec3};

pub const SVF_MAGIC: &[u8; 4] = b"SVF1";

/// Headers larger than this are rejected before JSON decoding.
const MAX_HEADER_LEN: usize = 1 << 20;

#[derive(Serialize, Deserialize)]
struct Header {
    dims: [usize; 3],
    origin: [f64; 3],
    spacing: [f64; 3],
    fields: Vec<FieldHeader>,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    name: String,
    kind: FieldKind,
}

pub fn load_svf(path: impl AsRef<Path>) -> Result<VolumeGrid> {
    let bytes = fs::read(path)?;
    parse_svf(&bytes)
}

pub fn save_svf(grid: &VolumeGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_svf(grid))?;
    Ok(())
}

pub fn encode_svf(grid: &VolumeGrid) -> Vec<u8> {
    let header = Header {
        dims: grid.dims,
        origin: grid.origin.into(),
        spacing: grid.spacing.into(),
        fields: grid
            .fields
            .iter()
            .map(|f| FieldHeader { name: f.name.clone(), kind: f.kind })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serialization is infallible");
    let payload: usize = grid.fields.iter().map(|f| f.data.len() * 4).sum();
    let mut out = Vec::with_capacity(8 + json.len() + payload);
    out.extend_from_slice(SVF_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for field in &grid.fields {
        for v in &field.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn parse_svf(bytes: &[u8]) -> Result<VolumeGrid> {
    if bytes.len() < 8 || &bytes[..4] != SVF_MAGIC {
        return Err(Error::Format("missing SVF1 magic".into()));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if header_len > MAX_HEADER_LEN {
        return Err(Error::Format(format!("header length {header_len} exceeds limit")));
    }
    let header_end = 8 + header_len;
    if bytes.len() < header_end {
        return Err(Error::Truncated { expected: header_end as u64, actual: bytes.len() as u64 });
    }
    let header: Header = serde_json::from_slice(&bytes[8..header_end])
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;

    let mut grid = VolumeGrid::new(
        header.dims,
        Vec3::from(header.origin),
        Vec3::from(header.spacing),
    )?;
    let points = grid.point_count();

    let mut expected = header_end as u64;
    for f in &header.fields {
        let size = (points as u64)
            .checked_mul(4 * f.kind.components() as u64)
            .and_then(|s| s.checked_add(expected));
        expected = size.unwrap_or(u64::MAX);
    }
    if expected != bytes.len() as u64 {
        return Err(Error::Truncated { expected, actual: bytes.len() as u64 });
    }

    let mut offset = header_end;
    for f in header.fields {
        let count = points * f.kind.components();
        let chunk = &bytes[offset..offset + 4 * count];
        offset += 4 * count;
        let data: Vec<f32> = chunk
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        grid.add_field(Field { name: f.name, kind: f.kind, data })?;
    }
    Ok(grid)
}
