//! Binary image-feature files.
//!
//! Layout (little-endian): the magic bytes `SFV1`, a `u32` record count, a
//! `u32` dimension, then `count × dimension` `f32` values. Record ids live in
//! a companion text file, one per line in body order.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const FEATURE_MAGIC: &[u8; 4] = b"SFV1";
const HEADER_LEN: usize = 12;

/// Companion id file for a feature file: the same path with `.ids` appended.
pub fn index_path_for(features: &Path) -> PathBuf {
    let mut s = features.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

#[derive(Clone, Debug)]
pub struct FeatureStore {
    dim: usize,
    rows: HashMap<String, usize>,
    values: Vec<f32>,
}

impl FeatureStore {
    /// Reads `path` and its companion id file.
    pub fn open(path: &Path) -> Result<Self> {
        Self::read(path, &index_path_for(path))
    }

    pub fn read(path: &Path, index_path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let ids = fs::read_to_string(index_path)?;
        Self::from_bytes(&bytes, ids.lines().map(str::to_string).collect())
    }

    pub fn from_bytes(bytes: &[u8], ids: Vec<String>) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != FEATURE_MAGIC {
            return Err(Error::Format(
                "feature file does not start with SFV1".into(),
            ));
        }
        let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if dim == 0 {
            return Err(Error::Format("feature dimension is zero".into()));
        }
        let expected = HEADER_LEN + count * dim * 4;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "feature file holds {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        if ids.len() != count {
            return Err(Error::Format(format!(
                "{} ids for {count} feature records",
                ids.len()
            )));
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut rows = HashMap::with_capacity(count);
        for (i, id) in ids.into_iter().enumerate() {
            if rows.insert(id.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate feature id '{id}'")));
            }
        }
        Ok(FeatureStore { dim, rows, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<Tensor> {
        let row = *self
            .rows
            .get(id)
            .ok_or_else(|| Error::Lookup(format!("feature id '{id}' not found in feature file")))?;
        let values = &self.values[row * self.dim..(row + 1) * self.dim];
        Tensor::vector(values.iter().map(|&v| f64::from(v)).collect())
    }
}

/// Writes `records` as a feature file plus its id file.
pub fn write_feature_file(path: &Path, records: &[(String, Vec<f32>)]) -> Result<()> {
    let dim = records.first().map_or(0, |(_, v)| v.len());
    if dim == 0 {
        return Err(Error::Contract(
            "feature file needs at least one nonempty record".into(),
        ));
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(FEATURE_MAGIC)?;
    out.write_all(&(records.len() as u32).to_le_bytes())?;
    out.write_all(&(dim as u32).to_le_bytes())?;
    for (id, v) in records {
        if v.len() != dim {
            return Err(Error::dim("feature record", &[dim], &[v.len()]));
        }
        if id.contains('\n') {
            return Err(Error::Contract(format!(
                "feature id {id:?} contains a newline"
            )));
        }
        for x in v {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    let mut index = BufWriter::new(fs::File::create(index_path_for(path))?);
    for (id, _) in records {
        writeln!(index, "{id}")?;
    }
    index.flush()?;
    Ok(())
}
