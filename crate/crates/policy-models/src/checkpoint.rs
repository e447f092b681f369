//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "BPPODESK"
//! version      u32      currently 1
//! n_entries    u32
//! entry*       name_len u32, name bytes (utf-8),
//!              n_dims u32, dims (u64 each),
//!              data (product(dims) f64, IEEE-754 bit patterns)
//! checksum     u32      CRC-32 of every byte before this field
//! ```
//!
//! Floats are written by bit pattern, so a save-load-save cycle is
//! byte-identical, including negative zeros and subnormals.

use std::path::Path;

use thiserror::Error;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"BPPODESK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// One named tensor: `data.len()` always equals the product of `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEntry {
    pub name: String,
    pub dims: Vec<u64>,
    pub data: Vec<f64>,
}

impl CheckpointEntry {
    /// A rank-1 entry covering a flat parameter vector.
    pub fn flat(name: &str, data: &[f64]) -> Self {
        Self {
            name: name.to_string(),
            dims: vec![data.len() as u64],
            data: data.to_vec(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {found}, this build reads {CHECKPOINT_VERSION}")]
    UnsupportedVersion { found: u32 },
    #[error("file truncated while reading {what}")]
    Truncated { what: String },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("entry {index} has a malformed name")]
    BadName { index: usize },
    #[error("entry `{name}` declares {declared} values but dims imply {implied}")]
    ShapeMismatch {
        name: String,
        declared: u64,
        implied: u64,
    },
    #[error("{extra} unexpected bytes after the checksum")]
    TrailingBytes { extra: usize },
}

/// Serializes `entries` to `path`.
pub fn save_checkpoint(path: &Path, entries: &[CheckpointEntry]) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for e in entries {
        let implied: u64 = e.dims.iter().product();
        assert_eq!(
            implied,
            e.data.len() as u64,
            "entry `{}`: dims {:?} do not match {} values",
            e.name,
            e.dims,
            e.data.len()
        );
        buf.extend_from_slice(&(e.name.len() as u32).to_le_bytes());
        buf.extend_from_slice(e.name.as_bytes());
        buf.extend_from_slice(&(e.dims.len() as u32).to_le_bytes());
        for d in &e.dims {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        for v in &e.data {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    let checksum = crc32fast::hash(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    std::fs::write(path, buf)?;
    Ok(())
}

/// Reads a checkpoint, verifying magic, version, and checksum.
pub fn load_checkpoint(path: &Path) -> Result<Vec<CheckpointEntry>, CheckpointError> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
    };

    let magic = r.take(8, "magic bytes")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion { found: version });
    }
    let n_entries = r.u32("entry count")? as usize;
    let mut entries = Vec::with_capacity(n_entries);
    for index in 0..n_entries {
        let name_len = r.u32(&format!("entry {index} name length"))? as usize;
        let name_bytes = r.take(name_len, &format!("entry {index} name"))?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| CheckpointError::BadName { index })?
            .to_string();
        let n_dims = r.u32(&format!("entry `{name}` rank"))? as usize;
        let mut dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            dims.push(r.u64(&format!("entry `{name}` dims"))?);
        }
        let count: u64 = dims.iter().product();
        let mut data = Vec::with_capacity(count as usize);
        let raw = r.take(count as usize * 8, &format!("entry `{name}` payload"))?;
        for chunk in raw.chunks_exact(8) {
            data.push(f64::from_bits(u64::from_le_bytes(
                chunk.try_into().expect("chunk of 8"),
            )));
        }
        entries.push(CheckpointEntry { name, dims, data });
    }
    let body_end = r.pos;
    let stored = r.u32("checksum")?;
    if r.pos != bytes.len() {
        return Err(CheckpointError::TrailingBytes {
            extra: bytes.len() - r.pos,
        });
    }
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(CheckpointError::ChecksumMismatch { stored, computed });
    }
    Ok(entries)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Truncated {
                what: what.to_string(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CheckpointError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64, CheckpointError> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
}
