use std::fs;

use anyhow::{Context, Result};
use log::info;
use sentifuse_core::data::{
    balance_classes, drop_neutral, filter_datapoints, label_datapoints, load_dataset,
    split_dataset, Datapoint, FeatureStore, SplitConfig,
};
use sentifuse_core::text::{build_vocabulary, encode_sequence, tokenize, Vocabulary};

use crate::args::GlobalOpts;
use crate::records::{write_records, PreparedRecord, SPLITS, VOCAB_FILE};
use crate::require;

fn prepared(d: &Datapoint, vocab: &Vocabulary) -> PreparedRecord {
    PreparedRecord {
        id: d.id.clone(),
        anp: d.anp.clone(),
        label: d.label.expect("labeled before splitting"),
        features: d.features.data().to_vec(),
        tokens: encode_sequence(vocab, &tokenize(&d.title, &d.description)),
    }
}

pub fn run(opts: &GlobalOpts) -> Result<()> {
    let data = require(&opts.data, "--data")?;
    let out = require(&opts.out, "--out")?;
    let store = opts
        .features
        .as_deref()
        .map(FeatureStore::open)
        .transpose()
        .context("reading feature file")?;
    let raw = load_dataset(data, store.as_ref())?;
    let loaded = raw.len();
    let mut kept = filter_datapoints(raw);
    label_datapoints(&mut kept)?;
    if opts.two_class {
        kept = drop_neutral(kept);
    }
    let seed = opts.seed.unwrap_or(0);
    let balanced = balance_classes(kept, seed)?;
    info!(
        "{loaded} records loaded, {} after filtering and balancing",
        balanced.len()
    );

    let split = split_dataset(&balanced, &SplitConfig::with_seed(seed))?;
    // vocabulary from training text only, so validation and test keep
    // genuinely unseen words
    let corpus: Vec<Vec<String>> = split
        .train
        .iter()
        .map(|d| tokenize(&d.title, &d.description))
        .collect();
    let vocab = build_vocabulary(&corpus, None)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    vocab.save(&out.join(VOCAB_FILE))?;
    for (name, part) in SPLITS.iter().zip([&split.train, &split.val, &split.test]) {
        let records: Vec<PreparedRecord> = part.iter().map(|d| prepared(d, &vocab)).collect();
        write_records(&out.join(format!("{name}.jsonl")), &records)?;
    }
    println!(
        "prepared {} records (train {}, val {}, test {}), vocabulary {} in {}",
        balanced.len(),
        split.train.len(),
        split.val.len(),
        split.test.len(),
        vocab.len(),
        out.display()
    );
    Ok(())
}
