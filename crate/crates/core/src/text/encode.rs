use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, PAD};
use crate::error::{Error, Result};

/// Fixed sequence length; longer inputs are truncated, shorter ones padded.
pub const MAX_LEN: usize = 101;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct EncodedSequence {
    ids: Vec<usize>,
    true_length: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    ids: Vec<usize>,
    true_length: usize,
}

impl TryFrom<RawSequence> for EncodedSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        EncodedSequence::from_ids(raw.ids, raw.true_length)
    }
}

impl From<EncodedSequence> for RawSequence {
    fn from(s: EncodedSequence) -> Self {
        RawSequence {
            ids: s.ids,
            true_length: s.true_length,
        }
    }
}

impl EncodedSequence {
    /// Checks the length and zero-padding invariants.
    pub fn from_ids(ids: Vec<usize>, true_length: usize) -> Result<Self> {
        if ids.len() != MAX_LEN
            || true_length > MAX_LEN
            || ids[true_length..].iter().any(|&i| i != PAD)
        {
            return Err(Error::Contract(format!(
                "encoded sequence must hold {MAX_LEN} ids with zeros after position {true_length}"
            )));
        }
        Ok(EncodedSequence { ids, true_length })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn true_length(&self) -> usize {
        self.true_length
    }

    /// Tokens for the unpadded prefix; unknown indices decode as `<unk>`.
    pub fn decode<'v>(&self, vocab: &'v Vocabulary) -> Vec<&'v str> {
        self.ids[..self.true_length]
            .iter()
            .map(|&i| vocab.token(i).unwrap_or(super::UNK_TOKEN))
            .collect()
    }
}

pub fn encode_sequence<S: AsRef<str>>(vocab: &Vocabulary, tokens: &[S]) -> EncodedSequence {
    let mut ids = vec![PAD; MAX_LEN];
    let n = tokens.len().min(MAX_LEN);
    for (slot, tok) in ids.iter_mut().zip(&tokens[..n]) {
        *slot = vocab.lookup(tok.as_ref());
    }
    EncodedSequence {
        ids,
        true_length: n,
    }
}
