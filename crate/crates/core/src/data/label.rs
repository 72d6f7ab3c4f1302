use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentiment classes, ordered `Negative < Neutral < Positive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];

    /// The word looked up in the word-vector table for this class.
    pub fn word(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }

    /// Class list for two- or three-way classification.
    pub fn classes(two_class: bool) -> Vec<Sentiment> {
        if two_class {
            vec![Sentiment::Negative, Sentiment::Positive]
        } else {
            Sentiment::ALL.to_vec()
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

impl FromStr for Sentiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sentiment::ALL
            .into_iter()
            .find(|c| c.word() == s)
            .ok_or_else(|| Error::Config(format!("unknown sentiment label '{s}'")))
    }
}

/// Scores with `|s| < NEUTRAL_BAND` are neutral; the band edges belong to
/// the outer classes.
pub const NEUTRAL_BAND: f64 = 0.035;

pub fn label_from_anp_score(score: f64) -> Result<Sentiment> {
    if !score.is_finite() {
        return Err(Error::Contract(format!(
            "ANP score must be finite, got {score}"
        )));
    }
    Ok(if score >= NEUTRAL_BAND {
        Sentiment::Positive
    } else if score <= -NEUTRAL_BAND {
        Sentiment::Negative
    } else {
        Sentiment::Neutral
    })
}
