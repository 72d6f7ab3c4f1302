use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};
use sentifuse_core::model::Model;
use sentifuse_core::projection::{project_2d, write_csv};
use sentifuse_core::train::{evaluate, Examples};

use crate::args::GlobalOpts;
use crate::records::{examples_for, output_rows, read_records, PreparedRecord};
use crate::require;

fn load_inputs(opts: &GlobalOpts) -> Result<(Model, Vec<PreparedRecord>, Examples)> {
    let ck = require(&opts.checkpoint, "--checkpoint")?;
    let model = Model::load(ck).with_context(|| format!("loading {}", ck.display()))?;
    let records = read_records(require(&opts.data, "--data")?)?;
    let text_model = opts
        .text_checkpoint
        .as_deref()
        .map(Model::load)
        .transpose()?;
    let examples = examples_for(&model, &records, text_model.as_ref())?;
    Ok((model, records, examples))
}

pub fn run_eval(opts: &GlobalOpts) -> Result<()> {
    let (model, _, examples) = load_inputs(opts)?;
    let metrics = evaluate(&model, &examples)?;
    println!("{}", metrics.to_json()?);
    Ok(())
}

pub fn run_project(opts: &GlobalOpts) -> Result<()> {
    let out = require(&opts.out, "--out")?;
    let (model, records, examples) = load_inputs(opts)?;
    let outputs = output_rows(&model, &examples)?;
    let meta: Vec<_> = records.iter().map(|r| (r.anp.clone(), r.label)).collect();
    let points = project_2d(&outputs, &meta)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&points, BufWriter::new(file))?;
    println!("wrote {} points to {}", points.len(), out.display());
    Ok(())
}
