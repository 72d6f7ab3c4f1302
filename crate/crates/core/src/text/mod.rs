//! Tokenization, vocabulary and fixed-length integer encoding of record text.

mod encode;
mod tokenize;
mod vocab;

pub use encode::{encode_sequence, EncodedSequence, MAX_LEN};
pub use tokenize::{tokenize, HREF_TOKEN, REL_TOKEN};
pub use vocab::{build_vocabulary, Vocabulary, PAD, PAD_TOKEN, UNK, UNK_TOKEN};
