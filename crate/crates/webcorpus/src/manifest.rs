//! Named-tensor checkpoint container with a byte-exact file format.
//!
//! File layout: `u64 LE` index length, UTF-8 JSON index, raw blob,
//! `u64 LE` FNV-1a checksum of the blob. All tensors are little-endian
//! f32.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub dtype: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    /// Length in bytes; always `4 * product(shape)`.
    pub length: usize,
}

impl TensorEntry {
    pub fn num_elements(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorManifest {
    pub index: BTreeMap<String, TensorEntry>,
    pub blob: Vec<u8>,
}

impl TensorManifest {
    /// Appends a tensor; entries are laid out contiguously in insertion
    /// order.
    pub fn push(&mut self, name: &str, shape: &[usize], data: &[f32]) -> Result<()> {
        if self.index.contains_key(name) {
            return Err(Error::InvalidConfig(format!("duplicate tensor {name:?}")));
        }
        let elems: usize = shape.iter().product();
        if elems != data.len() {
            return Err(Error::ShapeMismatch(name.to_string()));
        }
        let offset = self.blob.len();
        for v in data {
            self.blob.extend_from_slice(&v.to_le_bytes());
        }
        self.index.insert(
            name.to_string(),
            TensorEntry {
                dtype: "f32".to_string(),
                shape: shape.to_vec(),
                offset,
                length: elems * 4,
            },
        );
        Ok(())
    }

    pub fn bytes_of(&self, name: &str) -> Result<&[u8]> {
        let e = self
            .index
            .get(name)
            .ok_or_else(|| Error::MissingTensor(name.to_string()))?;
        Ok(&self.blob[e.offset..e.offset + e.length])
    }

    pub fn tensor(&self, name: &str) -> Result<Vec<f32>> {
        let bytes = self.bytes_of(name)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let index = serde_json::to_vec(&self.index)?;
        w.write_all(&(index.len() as u64).to_le_bytes())?;
        w.write_all(&index)?;
        w.write_all(&self.blob)?;
        w.write_all(&fnv1a64(&self.blob).to_le_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut len_buf = [0u8; 8];
        r.read_exact(&mut len_buf)?;
        let index_len = u64::from_le_bytes(len_buf) as usize;
        let mut index_buf = vec![0u8; index_len];
        r.read_exact(&mut index_buf)?;
        let index: BTreeMap<String, TensorEntry> = serde_json::from_slice(&index_buf)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if rest.len() < 8 {
            return Err(Error::ChecksumMismatch);
        }
        let blob = rest[..rest.len() - 8].to_vec();
        let checksum = u64::from_le_bytes(rest[rest.len() - 8..].try_into().unwrap());
        if fnv1a64(&blob) != checksum {
            return Err(Error::ChecksumMismatch);
        }
        Ok(TensorManifest { index, blob })
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
