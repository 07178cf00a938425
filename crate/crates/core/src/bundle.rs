//! Tensor bundle files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "CAMB"
//! version  u8       1
//! count    u32      number of entries
//! entry*:
//!   name_len u16, name (UTF-8, name_len bytes)
//!   dtype    u8     0 = f32
//!   ndim     u8
//!   dims     ndim × u32
//!   payload  product(dims) × f32, row-major
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"CAMB";
pub const VERSION: u8 = 1;
pub const DTYPE_F32: u8 = 0;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bad magic {0:?}, expected \"CAMB\"")]
    BadMagic([u8; 4]),
    #[error("unsupported bundle version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated bundle: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("{0} trailing bytes after the last entry")]
    TrailingBytes(usize),
    #[error("entry '{name}' has unknown dtype {dtype}")]
    UnknownDtype { name: String, dtype: u8 },
    #[error("entry '{name}' dims {dims:?} overflow")]
    DimOverflow { name: String, dims: Vec<u64> },
    #[error("entry '{name}' has invalid dims {dims:?}")]
    InvalidDims { name: String, dims: Vec<u64> },
    #[error("entry name is not valid UTF-8")]
    InvalidName,
    #[error("entry name '{0}' is too long")]
    NameTooLong(String),
    #[error("duplicate entry '{0}'")]
    DuplicateEntry(String),
    #[error("missing entry '{0}'")]
    MissingEntry(String),
    #[error("bundle i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Named tensors in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bundle {
    entries: Vec<(String, Tensor)>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<(), BundleError> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(BundleError::DuplicateEntry(name));
        }
        if name.len() > u16::MAX as usize {
            return Err(BundleError::NameTooLong(name));
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, tensor: Tensor) -> Result<Self, BundleError> {
        self.insert(name, tensor)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor, BundleError> {
        self.get(name)
            .ok_or_else(|| BundleError::MissingEntry(name.to_string()))
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn encode(bundle: &Bundle) -> Result<Vec<u8>, BundleError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(bundle.entries.len() as u32).to_le_bytes());
    for (name, t) in &bundle.entries {
        if name.len() > u16::MAX as usize {
            return Err(BundleError::NameTooLong(name.clone()));
        }
        let bad_dims = || BundleError::InvalidDims {
            name: name.clone(),
            dims: t.dims().iter().map(|&d| d as u64).collect(),
        };
        if t.ndim() > u8::MAX as usize || t.dims().iter().any(|&d| d > u32::MAX as usize) {
            return Err(bad_dims());
        }
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(DTYPE_F32);
        out.push(t.ndim() as u8);
        for &d in t.dims() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BundleError> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(BundleError::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, BundleError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, BundleError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, BundleError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Bundle, BundleError> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4)?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(BundleError::BadMagic(magic));
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(BundleError::UnsupportedVersion(version));
    }
    let count = cur.u32()?;
    let mut bundle = Bundle::new();
    for _ in 0..count {
        let name_len = cur.u16()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| BundleError::InvalidName)?
            .to_string();
        let dtype = cur.u8()?;
        if dtype != DTYPE_F32 {
            return Err(BundleError::UnknownDtype { name, dtype });
        }
        let ndim = cur.u8()? as usize;
        let dims: Vec<u64> = (0..ndim)
            .map(|_| cur.u32().map(u64::from))
            .collect::<Result<_, _>>()?;
        if ndim == 0 || dims.contains(&0) {
            return Err(BundleError::InvalidDims { name, dims });
        }
        let bytes_needed = dims
            .iter()
            .try_fold(4u64, |acc, &d| acc.checked_mul(d))
            .and_then(|b| usize::try_from(b).ok())
            .ok_or_else(|| BundleError::DimOverflow {
                name: name.clone(),
                dims: dims.clone(),
            })?;
        let payload = cur.take(bytes_needed)?;
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let dims: Vec<usize> = dims.iter().map(|&d| d as usize).collect();
        let tensor = Tensor::new(dims.clone(), data).map_err(|_| BundleError::InvalidDims {
            name: name.clone(),
            dims: dims.iter().map(|&d| d as u64).collect(),
        })?;
        bundle.insert(name, tensor)?;
    }
    let trailing = bytes.len() - cur.pos;
    if trailing != 0 {
        return Err(BundleError::TrailingBytes(trailing));
    }
    Ok(bundle)
}

pub fn read_bundle(path: impl AsRef<Path>) -> Result<Bundle, BundleError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| BundleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

pub fn write_bundle(path: impl AsRef<Path>, bundle: &Bundle) -> Result<(), BundleError> {
    let path = path.as_ref();
    let bytes = encode(bundle)?;
    fs::write(path, bytes).map_err(|source| BundleError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Bundle {
        Bundle::new()
            .with("image", Tensor::new(vec![1, 2, 2], vec![0.0, 0.5, -1.0, 2.0]).unwrap())
            .unwrap()
            .with("score", Tensor::new(vec![1], vec![0.25]).unwrap())
            .unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"CAMB");
        assert_eq!(bytes[4], 1);
        assert_eq!(&bytes[5..9], &2u32.to_le_bytes());
        assert_eq!(&bytes[9..11], &5u16.to_le_bytes());
        assert_eq!(&bytes[11..16], b"image");
        assert_eq!(bytes[16], 0);
        assert_eq!(bytes[17], 3);
    }

    #[test]
    fn round_trip() {
        let b = sample();
        assert_eq!(decode(&encode(&b).unwrap()).unwrap(), b);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode(&bytes), Err(BundleError::BadMagic(_))));
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode(&sample()).unwrap();
        assert!(matches!(
            decode(&bytes[..bytes.len() - 2]),
            Err(BundleError::Truncated { .. })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode(&extra), Err(BundleError::TrailingBytes(1))));
    }

    #[test]
    fn unknown_dtype() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[16] = 7;
        assert!(matches!(
            decode(&bytes),
            Err(BundleError::UnknownDtype { dtype: 7, .. })
        ));
    }

    #[test]
    fn dim_overflow() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"CAMB");
        bytes.push(1);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.push(b'x');
        bytes.push(0);
        bytes.push(4);
        for _ in 0..4 {
            bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        }
        assert!(matches!(decode(&bytes), Err(BundleError::DimOverflow { .. })));
    }

    #[test]
    fn duplicate_names_rejected() {
        let t = Tensor::new(vec![1], vec![1.0]).unwrap();
        let b = Bundle::new().with("a", t.clone()).unwrap();
        assert!(matches!(b.with("a", t), Err(BundleError::DuplicateEntry(_))));
    }
}
