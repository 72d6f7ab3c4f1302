//! Binary checkpoints.
//!
//! Layout: `SFCK`, format version (u32 LE), manifest length in bytes (u64
//! LE), a JSON manifest, then every tensor's values as f64 LE in manifest
//! order. Label vectors of projection models are stored as tensors named
//! `label_embedding.<class word>`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::Model;
use super::spec::ModelSpec;
use crate::data::EmbeddingTable;
use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SFCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const LABEL_PREFIX: &str = "label_embedding.";

#[derive(Serialize, Deserialize)]
struct Manifest {
    spec: ModelSpec,
    tensors: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

impl Model {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut entries: Vec<(String, &Tensor)> = Vec::new();
        self.visit(&mut |n, t| entries.push((n, t)));
        if let Some(labels) = self.label_embeddings() {
            for c in self.classes() {
                entries.push((format!("{LABEL_PREFIX}{}", c.word()), labels.get(c.word())?));
            }
        }
        let manifest = Manifest {
            spec: self.spec().clone(),
            tensors: entries
                .iter()
                .map(|(n, t)| TensorEntry {
                    name: n.clone(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&manifest)?;
        let body: usize = entries.iter().map(|(_, t)| t.len() * 8).sum();
        let mut out = Vec::with_capacity(16 + json.len() + body);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &entries {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("checkpoint: {m}"));
        if bytes.len() < 16 || &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(bad("missing SFCK header"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let json_end = usize::try_from(len)
            .ok()
            .and_then(|l| l.checked_add(16))
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| bad("manifest runs past end of file"))?;
        let manifest: Manifest = serde_json::from_slice(&bytes[16..json_end])?;
        let mut rest = &bytes[json_end..];
        let mut params = ParamSet::new();
        let mut labels: Option<EmbeddingTable> = None;
        for e in manifest.tensors {
            let n: usize = e.shape.iter().product();
            if rest.len() < n * 8 {
                return Err(bad(&format!("data for {} is truncated", e.name)));
            }
            let (chunk, tail) = rest.split_at(n * 8);
            rest = tail;
            let values = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            let t = Tensor::new(e.shape, values)?;
            match e.name.strip_prefix(LABEL_PREFIX) {
                Some(word) => labels
                    .get_or_insert_with(|| EmbeddingTable::new(t.len()))
                    .insert(word, t)?,
                None => params.insert(e.name, t),
            }
        }
        if !rest.is_empty() {
            return Err(bad(&format!("{} trailing bytes", rest.len())));
        }
        Model::from_parts(manifest.spec, &params, labels)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_bytes()?)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
