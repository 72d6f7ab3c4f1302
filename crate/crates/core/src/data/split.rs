use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: 0.7,
            val: 0.2,
            test: 0.1,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(seed: u64) -> Self {
        SplitConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "split fractions must be in [0, 1] and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Smallest dataset the splitter accepts.
pub const MIN_SPLIT_SIZE: usize = 10;

fn portion(fraction: f64, n: usize) -> usize {
    // guard against products like 0.7 * 10 = 7.000000000000001 landing low
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Seeded shuffle, then `floor(train·n)`, `floor(val·n)` and the remainder.
pub fn split_dataset<T: Clone>(data: &[T], cfg: &SplitConfig) -> Result<Split<T>> {
    cfg.validate()?;
    let n = data.len();
    if n < MIN_SPLIT_SIZE {
        return Err(Error::Contract(format!(
            "need at least {MIN_SPLIT_SIZE} records to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_train = portion(cfg.train, n);
    let n_val = portion(cfg.val, n);
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(&order[..n_train]),
        val: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
    })
}

/// Index batches for one epoch. The order is reshuffled per epoch from
/// `(seed, epoch)`; the last batch may be short.
pub fn batch_indices(
    len: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    order.shuffle(&mut rng);
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

pub fn batch_iter<T>(
    data: &[T],
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<impl Iterator<Item = Vec<&T>>> {
    let batches = batch_indices(data.len(), batch_size, seed, epoch)?;
    Ok(batches
        .into_iter()
        .map(move |b| b.into_iter().map(|i| &data[i]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hundred_items_split_seventy_twenty_ten() {
        let data: Vec<u32> = (0..100).collect();
        let s = split_dataset(&data, &SplitConfig::with_seed(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (70, 20, 10));
        assert_eq!(s, split_dataset(&data, &SplitConfig::with_seed(1)).unwrap());
        assert_ne!(s, split_dataset(&data, &SplitConfig::with_seed(2)).unwrap());
    }

    #[test]
    fn small_or_misconfigured_splits_fail() {
        let data: Vec<u32> = (0..9).collect();
        assert!(matches!(
            split_dataset(&data, &SplitConfig::default()),
            Err(Error::Contract(_))
        ));
        let bad = SplitConfig {
            train: 0.8,
            ..Default::default()
        };
        assert!(matches!(
            split_dataset(&(0..20).collect::<Vec<_>>(), &bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn batch_shapes() {
        let sizes: Vec<usize> = batch_indices(130, 64, 0, 0)
            .unwrap()
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(sizes, [64, 64, 2]);
        assert_eq!(
            batch_indices(130, 64, 5, 3).unwrap(),
            batch_indices(130, 64, 5, 3).unwrap()
        );
        assert_ne!(
            batch_indices(130, 64, 5, 3).unwrap(),
            batch_indices(130, 64, 5, 4).unwrap()
        );
        assert_eq!(batch_indices(7, 1, 0, 0).unwrap().len(), 7);
        assert!(batch_indices(7, 0, 0, 0).is_err());
        let data = ["a", "b", "c"];
        let all: Vec<&str> = batch_iter(&data, 2, 0, 0)
            .unwrap()
            .flatten()
            .copied()
            .collect();
        assert_eq!(all.len(), 3);
    }

    proptest! {
        #[test]
        fn split_is_a_disjoint_cover(n in 10usize..300, seed in any::<u64>()) {
            let data: Vec<usize> = (0..n).collect();
            let s = split_dataset(&data, &SplitConfig::with_seed(seed)).unwrap();
            prop_assert_eq!(s.train.len(), n * 7 / 10);
            prop_assert_eq!(s.val.len(), n * 2 / 10);
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, data);
        }
    }
}
