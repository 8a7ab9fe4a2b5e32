//! Versioned binary container shared by all model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes   "PPMODEL\0"
//! version      u32       FORMAT_VERSION
//! header_len   u64       byte length of the JSON header
//! header       JSON      {"kind": .., "meta": .., "tensors": [{"name": .., "shape": [..]}, ..]}
//! payload      f64 LE    every tensor in header order, row-major
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::Tensor;

pub const MAGIC: &[u8; 8] = b"PPMODEL\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: serde_json::Value,
    tensors: Vec<TensorEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: String,
    pub meta: serde_json::Value,
    pub tensors: Vec<(String, Tensor)>,
}

impl Container {
    pub fn new<M: Serialize>(kind: &str, meta: &M) -> Result<Self> {
        Ok(Container {
            kind: kind.to_string(),
            meta: serde_json::to_value(meta)?,
            tensors: Vec::new(),
        })
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: &Tensor) {
        self.tensors.push((name.into(), tensor.clone()));
    }

    pub fn meta<M: for<'de> Deserialize<'de>>(&self) -> Result<M> {
        Ok(serde_json::from_value(self.meta.clone())?)
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Format(format!(
                "expected a {kind} model, found {}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Removes and returns the tensor called `name`.
    pub fn take(&mut self, name: &str) -> Result<Tensor> {
        let pos = self
            .tensors
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::Format(format!("missing tensor {name:?}")))?;
        Ok(self.tensors.remove(pos).1)
    }

    /// Moves every tensor of `other` in under `prefix.`; its meta is returned.
    pub fn absorb(&mut self, prefix: &str, other: Container) -> serde_json::Value {
        for (name, t) in other.tensors {
            self.tensors.push((format!("{prefix}.{name}"), t));
        }
        serde_json::json!({"kind": other.kind, "meta": other.meta})
    }

    /// Inverse of [`Container::absorb`].
    pub fn extract(&mut self, prefix: &str, stored: serde_json::Value) -> Result<Container> {
        let head = format!("{prefix}.");
        let (inner, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.tensors)
            .into_iter()
            .partition(|(n, _)| n.starts_with(&head));
        self.tensors = rest;
        let kind = stored["kind"]
            .as_str()
            .ok_or_else(|| Error::Format(format!("nested {prefix} model has no kind")))?
            .to_string();
        Ok(Container {
            kind,
            meta: stored["meta"].clone(),
            tensors: inner
                .into_iter()
                .map(|(n, t)| (n[head.len()..].to_string(), t))
                .collect(),
        })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|(name, t)| TensorEntry {
                    name: name.clone(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for (_, t) in &self.tensors {
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mut u32_buf = [0u8; 4];
        r.read_exact(&mut u32_buf)?;
        let version = u32::from_le_bytes(u32_buf);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut u64_buf = [0u8; 8];
        r.read_exact(&mut u64_buf)?;
        let len = u64::from_le_bytes(u64_buf) as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: Header = serde_json::from_slice(&json)?;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for entry in header.tensors {
            let n: usize = entry.shape.iter().product();
            let mut bytes = vec![0u8; n * 8];
            r.read_exact(&mut bytes)?;
            let data = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            tensors.push((entry.name, Tensor::new(entry.shape, data)?));
        }
        Ok(Container {
            kind: header.kind,
            meta: header.meta,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Container::read(BufReader::new(file))
    }
}
