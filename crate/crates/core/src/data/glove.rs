use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Token → vector table read from a GloVe text file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Tensor>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, v: Tensor) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::dim("embedding table insert", &[self.dim], v.shape()));
        }
        self.vectors.insert(token.into(), v);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Result<&Tensor> {
        self.vectors
            .get(token)
            .ok_or_else(|| Error::Lookup(format!("token '{token}' has no word vector")))
    }
}

pub fn load_glove(path: &Path, dim: usize) -> Result<EmbeddingTable> {
    parse_glove(&fs::read_to_string(path)?, path, dim)
}

/// One `token v1 … v_dim` line per entry. A repeated token keeps its last
/// vector.
pub fn parse_glove(text: &str, origin: &Path, dim: usize) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::new(dim);
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message,
        };
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| err(format!("bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(err(format!(
                "token '{token}' has {} values, expected {dim}",
                values.len()
            )));
        }
        table
            .vectors
            .insert(token.to_string(), Tensor::vector(values)?);
    }
    Ok(table)
}
