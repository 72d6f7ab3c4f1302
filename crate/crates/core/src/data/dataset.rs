//! JSON Lines dataset records.
//!
//! Each line carries `id`, `title`, `description`, `anp`, `anp_score` and
//! exactly one of `features` (inline numbers) or `features_ref` (an id into a
//! [`FeatureStore`]). `tags` and `label` are optional.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::features::FeatureStore;
use super::label::{label_from_anp_score, Sentiment};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Minimum number of whitespace-separated words across title and
/// description.
pub const MIN_TEXT_WORDS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Datapoint {
    pub id: String,
    pub title: String,
    pub description: String,
    pub tags: Vec<String>,
    pub anp: String,
    pub anp_score: f64,
    pub features: Tensor,
    pub label: Option<Sentiment>,
}

impl Datapoint {
    pub fn word_count(&self) -> usize {
        self.title.split_whitespace().count() + self.description.split_whitespace().count()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    title: String,
    description: String,
    anp: String,
    anp_score: f64,
    #[serde(default)]
    tags: Vec<String>,
    features: Option<Vec<f64>>,
    features_ref: Option<String>,
    label: Option<Sentiment>,
}

pub fn load_dataset(path: &Path, store: Option<&FeatureStore>) -> Result<Vec<Datapoint>> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, path, store)
}

/// Parses dataset text; `origin` only labels error messages.
pub fn parse_dataset(
    text: &str,
    origin: &Path,
    store: Option<&FeatureStore>,
) -> Result<Vec<Datapoint>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| parse_err(lineno, e.to_string()))?;
        if raw.anp.split_whitespace().count() != 2 {
            return Err(parse_err(
                lineno,
                format!("anp {:?} is not an adjective-noun pair", raw.anp),
            ));
        }
        let features = match (raw.features, raw.features_ref) {
            (Some(v), None) => Tensor::vector(v).map_err(|e| parse_err(lineno, e.to_string()))?,
            (None, Some(r)) => {
                let store = store.ok_or_else(|| {
                    Error::Lookup(format!(
                        "record '{}' references feature id '{r}' but no feature file was given",
                        raw.id
                    ))
                })?;
                store.get(&r)?
            }
            _ => {
                return Err(parse_err(
                    lineno,
                    "exactly one of `features` or `features_ref` is required".into(),
                ))
            }
        };
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(parse_err(
                    lineno,
                    format!(
                        "feature dimension {} differs from earlier records ({d})",
                        features.len()
                    ),
                ))
            }
            _ => {}
        }
        out.push(Datapoint {
            id: raw.id,
            title: raw.title,
            description: raw.description,
            tags: raw.tags,
            anp: raw.anp,
            anp_score: raw.anp_score,
            features,
            label: raw.label,
        });
    }
    Ok(out)
}

/// Keeps records with at least [`MIN_TEXT_WORDS`] words of text, in order.
pub fn filter_datapoints(data: Vec<Datapoint>) -> Vec<Datapoint> {
    filter_datapoints_with(data, |_| true)
}

/// Like [`filter_datapoints`] with an extra predicate (for language or
/// spelling checks supplied by the caller).
pub fn filter_datapoints_with(
    data: Vec<Datapoint>,
    extra: impl Fn(&Datapoint) -> bool,
) -> Vec<Datapoint> {
    data.into_iter()
        .filter(|d| d.word_count() >= MIN_TEXT_WORDS && extra(d))
        .collect()
}

/// Assigns every record its label from the ANP score.
pub fn label_datapoints(data: &mut [Datapoint]) -> Result<()> {
    for d in data {
        d.label = Some(label_from_anp_score(d.anp_score)?);
    }
    Ok(())
}

pub fn drop_neutral(data: Vec<Datapoint>) -> Vec<Datapoint> {
    data.into_iter()
        .filter(|d| d.label != Some(Sentiment::Neutral))
        .collect()
}

/// Seeded downsampling of every class to the size of the smallest one.
/// Survivors keep their original relative order.
pub fn balance_classes(data: Vec<Datapoint>, seed: u64) -> Result<Vec<Datapoint>> {
    let mut by_class: BTreeMap<Sentiment, Vec<usize>> = BTreeMap::new();
    for (i, d) in data.iter().enumerate() {
        let label = d
            .label
            .ok_or_else(|| Error::Contract(format!("record '{}' is unlabeled", d.id)))?;
        by_class.entry(label).or_default().push(i);
    }
    let Some(min) = by_class.values().map(Vec::len).min() else {
        return Ok(data);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; data.len()];
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        for &i in &idx[..min] {
            keep[i] = true;
        }
    }
    Ok(data
        .into_iter()
        .zip(keep)
        .filter_map(|(d, k)| k.then_some(d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::features::write_feature_file;

    fn line(id: &str, score: f64, features: &str) -> String {
        format!(
            r#"{{"id":"{id}","title":"a title","description":"some words here","anp":"nice smile","anp_score":{score},{features}}}"#
        )
    }

    fn point(words: usize, label: Option<Sentiment>, id: &str) -> Datapoint {
        Datapoint {
            id: id.into(),
            title: String::new(),
            description: vec!["w"; words].join(" "),
            tags: vec![],
            anp: "nice smile".into(),
            anp_score: 0.0,
            features: Tensor::zeros(&[2]).unwrap(),
            label,
        }
    }

    #[test]
    fn three_line_file_gives_three_points() {
        let text = [
            line("a", 2.019, r#""features":[1,2]"#),
            line("b", -2.128, r#""features":[3,4]"#),
            line("c", 0.0, r#""features":[5,6]"#),
        ]
        .join("\n");
        let data = parse_dataset(&text, Path::new("x.jsonl"), None).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data[1].features.data(), &[3.0, 4.0]);
    }

    #[test]
    fn missing_score_names_the_field_and_line() {
        let text = format!(
            "{}\n{}",
            line("a", 1.0, r#""features":[1]"#),
            r#"{"id":"b","title":"t","description":"d","anp":"sad day","features":[1]}"#
        );
        let err = parse_dataset(&text, Path::new("x.jsonl"), None).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("anp_score"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_feature_ref_names_the_id() {
        let dir = tempfile::tempdir().unwrap();
        let fpath = dir.path().join("f.sfv");
        write_feature_file(&fpath, &[("known".into(), vec![1.0, 2.0])]).unwrap();
        let store = FeatureStore::open(&fpath).unwrap();

        let ok = line("a", 1.0, r#""features_ref":"known""#);
        assert_eq!(
            parse_dataset(&ok, Path::new("x"), Some(&store)).unwrap()[0]
                .features
                .data(),
            &[1.0, 2.0]
        );

        let bad = line("a", 1.0, r#""features_ref":"ghost""#);
        let err = parse_dataset(&bad, Path::new("x"), Some(&store)).unwrap_err();
        assert!(
            matches!(&err, Error::Lookup(m) if m.contains("ghost")),
            "{err}"
        );
    }

    #[test]
    fn rejects_both_or_neither_feature_source_and_bad_anp() {
        let both = line("a", 1.0, r#""features":[1],"features_ref":"x""#);
        assert!(parse_dataset(&both, Path::new("x"), None).is_err());
        let neither = line("a", 1.0, r#""tags":[]"#);
        assert!(parse_dataset(&neither, Path::new("x"), None).is_err());
        let three_words =
            line("a", 1.0, r#""features":[1]"#).replace("nice smile", "very nice smile");
        assert!(parse_dataset(&three_words, Path::new("x"), None).is_err());
    }

    #[test]
    fn feature_dimension_must_be_constant() {
        let text = [
            line("a", 1.0, r#""features":[1,2]"#),
            line("b", 1.0, r#""features":[1]"#),
        ]
        .join("\n");
        assert!(matches!(
            parse_dataset(&text, Path::new("x"), None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn word_count_filter() {
        let data = vec![
            point(9, None, "nine"),
            point(10, None, "ten"),
            point(30, None, "thirty"),
        ];
        let kept = filter_datapoints(data);
        let ids: Vec<_> = kept.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["ten", "thirty"]);
        assert!(filter_datapoints(vec![]).is_empty());
        // idempotent
        assert_eq!(filter_datapoints(kept.clone()), kept);
    }

    #[test]
    fn balancing_downsamples_to_minority() {
        let mut data = Vec::new();
        for i in 0..7 {
            data.push(point(10, Some(Sentiment::Positive), &format!("p{i}")));
        }
        for i in 0..3 {
            data.push(point(10, Some(Sentiment::Negative), &format!("n{i}")));
        }
        data.push(point(10, Some(Sentiment::Neutral), "z"));
        let two = drop_neutral(data.clone());
        assert_eq!(two.len(), 10);
        let balanced = balance_classes(two, 9).unwrap();
        assert_eq!(balanced.len(), 6);
        assert_eq!(
            balanced
                .iter()
                .filter(|d| d.label == Some(Sentiment::Negative))
                .count(),
            3
        );
        assert_eq!(balance_classes(drop_neutral(data), 9).unwrap(), balanced);
        assert!(balance_classes(vec![point(10, None, "u")], 0).is_err());
    }
}
