//! Synthetic datasets shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sentifuse_core::data::{EmbeddingTable, Sentiment};
use sentifuse_core::train::{Examples, Inputs};
use sentifuse_core::Tensor;

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| gauss(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn label_of(positive: bool) -> Sentiment {
    if positive {
        Sentiment::Positive
    } else {
        Sentiment::Negative
    }
}

/// Two-class image-like features: `±margin` along a hidden direction plus
/// unit Gaussian noise. `direction_seed` fixes the direction so separate
/// draws share one distribution.
pub fn separable(n: usize, d: usize, margin: f64, direction_seed: u64, seed: u64) -> Examples {
    let dir = unit_vector(d, &mut ChaCha8Rng::seed_from_u64(direction_seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let pos = i % 2 == 0;
        let s = if pos { margin } else { -margin };
        rows.push(
            dir.iter()
                .map(|u| s * u + gauss(&mut rng))
                .collect::<Vec<_>>(),
        );
        labels.push(label_of(pos));
    }
    Examples::new(Inputs::Features(Tensor::from_rows(&rows).unwrap()), labels).unwrap()
}

/// Dual-modality data. A `text_share` fraction of records carries the label
/// only in the text features; the rest carry it only in the image features.
/// The uninformative modality is pure noise.
pub fn dual_modality(
    n: usize,
    text_dim: usize,
    image_dim: usize,
    text_share: f64,
    margin: f64,
    seed: u64,
) -> Examples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tdir = unit_vector(text_dim, &mut rng);
    let idir = unit_vector(image_dim, &mut rng);
    let n_text = (text_share * n as f64).round() as usize;
    let (mut text, mut image, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let pos = rng.random::<bool>();
        let s = if pos { margin } else { -margin };
        let text_decides = i < n_text;
        let t: Vec<f64> = tdir
            .iter()
            .map(|u| if text_decides { s * u } else { 0.0 } + gauss(&mut rng))
            .collect();
        let v: Vec<f64> = idir
            .iter()
            .map(|u| if text_decides { 0.0 } else { s * u } + gauss(&mut rng))
            .collect();
        text.push(t);
        image.push(v);
        labels.push(label_of(pos));
    }
    Examples::new(
        Inputs::Dual {
            text: Tensor::from_rows(&text).unwrap(),
            image: Tensor::from_rows(&image).unwrap(),
        },
        labels,
    )
    .unwrap()
}

/// Random 50-d label vectors standing in for pretrained word vectors.
pub fn label_vectors(seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = EmbeddingTable::new(50);
    for s in Sentiment::ALL {
        let v: Vec<f64> = (0..50).map(|_| gauss(&mut rng)).collect();
        t.insert(s.word(), Tensor::vector(v).unwrap()).unwrap();
    }
    t
}

/// Text-only view of dual-modality examples.
pub fn text_view(ex: &Examples) -> Examples {
    match &ex.inputs {
        Inputs::Dual { text, .. } => {
            Examples::new(Inputs::Features(text.clone()), ex.labels.clone()).unwrap()
        }
        _ => panic!("expected dual inputs"),
    }
}
