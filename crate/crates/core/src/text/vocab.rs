use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Dense token ↔ index map. Index 0 pads, index 1 stands for unknown tokens,
/// real tokens follow by descending corpus frequency.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    // present only for vocabularies built from a corpus
    counts: Option<Vec<u64>>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

/// Counts tokens and ranks them by frequency, ties in lexicographic order.
/// `cap` limits the number of real tokens kept.
///
/// The reserved strings `<pad>` and `<unk>` are not counted if they occur
/// in the corpus; they keep their reserved indices.
pub fn build_vocabulary<S: AsRef<str>>(
    corpus: &[Vec<S>],
    cap: Option<usize>,
) -> Result<Vocabulary> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in corpus {
        for tok in doc {
            let tok = tok.as_ref();
            if tok != PAD_TOKEN && tok != UNK_TOKEN {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::Contract(
            "cannot build a vocabulary from an empty corpus".into(),
        ));
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    // BTreeMap order is already lexicographic and the sort is stable
    ranked.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    if let Some(cap) = cap {
        ranked.truncate(cap);
    }
    let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    let mut freq = vec![0, 0];
    for (t, c) in ranked {
        tokens.push(t.to_string());
        freq.push(c);
    }
    let mut v = Vocabulary::from_tokens(tokens);
    v.counts = Some(freq);
    Ok(v)
}

impl Vocabulary {
    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            index,
            counts: None,
        }
    }

    /// Number of indices, reserved ones included.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index for `token`, or [`UNK`].
    pub fn lookup(&self, token: &str) -> usize {
        self.index_of(token).unwrap_or(UNK)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Corpus frequency of the token at `index`, if this vocabulary was built
    /// rather than loaded.
    pub fn count(&self, index: usize) -> Option<u64> {
        self.counts.as_ref()?.get(index).copied()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let _ = writeln!(s, "{t}\t{i}");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_tsv())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_tsv(&fs::read_to_string(path)?, path)
    }

    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let (tok, idx) = line
                .rsplit_once('\t')
                .ok_or_else(|| err("expected token<TAB>index".into()))?;
            let idx: usize = idx
                .parse()
                .map_err(|e| err(format!("bad index {idx:?}: {e}")))?;
            if idx != tokens.len() {
                return Err(err(format!(
                    "index {idx} out of sequence, expected {}",
                    tokens.len()
                )));
            }
            tokens.push(tok.to_string());
        }
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[UNK] != UNK_TOKEN {
            return Err(Error::Format(format!(
                "{}: vocabulary must start with {PAD_TOKEN} and {UNK_TOKEN}",
                origin.display()
            )));
        }
        let v = Self::from_tokens(tokens);
        if v.index.len() != v.tokens.len() {
            return Err(Error::Format(format!(
                "{}: duplicate token in vocabulary",
                origin.display()
            )));
        }
        Ok(v)
    }
}
