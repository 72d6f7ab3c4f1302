use crate::data::{EmbeddingTable, Sentiment};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// The allowed label whose vector is closest in cosine similarity to
/// `output`. Ties go to the earlier label in `negative < neutral < positive`
/// order.
pub fn predict_nearest_label(
    output: &Tensor,
    labels: &EmbeddingTable,
    allowed: &[Sentiment],
) -> Result<Sentiment> {
    if output.norm() == 0.0 {
        return Err(Error::DegenerateVector("model output"));
    }
    let mut order = allowed.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut best: Option<(Sentiment, f64)> = None;
    for label in order {
        let sim = output.cosine_similarity(labels.get(label.word())?)?;
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((label, sim));
        }
    }
    best.map(|(l, _)| l)
        .ok_or_else(|| Error::Contract("no allowed labels".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(seed: u64) -> EmbeddingTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = EmbeddingTable::new(50);
        for s in Sentiment::ALL {
            t.insert(
                s.word(),
                Tensor::uniform(&[50], -1.0, 1.0, &mut rng).unwrap(),
            )
            .unwrap();
        }
        t
    }

    #[test]
    fn exact_label_vector_wins() {
        let t = table(1);
        let out = t.get("positive").unwrap().clone();
        assert_eq!(
            predict_nearest_label(&out, &t, &Sentiment::ALL).unwrap(),
            Sentiment::Positive
        );
    }

    #[test]
    fn negated_label_in_two_class_matches_brute_force() {
        let t = table(2);
        let two = Sentiment::classes(true);
        let out = t.get("negative").unwrap().scale(-1.0);
        let cos = |s: Sentiment| out.cosine_similarity(t.get(s.word()).unwrap()).unwrap();
        let expected = if cos(Sentiment::Positive) > cos(Sentiment::Negative) {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        };
        assert_eq!(predict_nearest_label(&out, &t, &two).unwrap(), expected);
    }

    #[test]
    fn ties_resolve_in_fixed_order() {
        let mut t = EmbeddingTable::new(2);
        let v = Tensor::vector(vec![1.0, 0.0]).unwrap();
        for s in Sentiment::ALL {
            t.insert(s.word(), v.clone()).unwrap();
        }
        let out = Tensor::vector(vec![0.3, 0.7]).unwrap();
        let shuffled = [Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative];
        assert_eq!(
            predict_nearest_label(&out, &t, &shuffled).unwrap(),
            Sentiment::Negative
        );
        assert_eq!(
            predict_nearest_label(&out, &t, &[Sentiment::Positive, Sentiment::Neutral]).unwrap(),
            Sentiment::Neutral
        );
    }

    #[test]
    fn zero_output_and_missing_label_fail() {
        let t = table(3);
        let zero = Tensor::zeros(&[50]).unwrap();
        assert!(matches!(
            predict_nearest_label(&zero, &t, &Sentiment::ALL),
            Err(Error::DegenerateVector(_))
        ));
        let empty = EmbeddingTable::new(50);
        let out = Tensor::ones(&[50]).unwrap();
        assert!(matches!(
            predict_nearest_label(&out, &empty, &Sentiment::ALL),
            Err(Error::Lookup(_))
        ));
    }

    proptest! {
        #[test]
        fn positive_scaling_never_changes_the_decision(
            v in prop::collection::vec(-1.0f64..1.0, 50),
            alpha in 1e-3f64..1e3,
            seed in 0u64..20,
        ) {
            let t = table(seed);
            let out = Tensor::vector(v).unwrap();
            prop_assume!(out.norm() > 1e-6);
            let a = predict_nearest_label(&out, &t, &Sentiment::ALL).unwrap();
            let b = predict_nearest_label(&out.scale(alpha), &t, &Sentiment::ALL).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
