use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sentifuse_core::objectives::{LossKind, OptimizerKind};
use sentifuse_core::OpKind;

#[derive(Parser, Debug)]
#[command(
    name = "sentifuse",
    version,
    about = "Image and text sentiment classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Filter, label, balance and split a raw dataset; encode its text
    Prepare,
    /// Train a model on a prepared dataset
    Train,
    /// Score a checkpoint on a split file; prints metrics JSON
    Eval,
    /// Write a 2-D projection of model outputs as CSV
    Project,
    /// Run the finite-difference gradient suite
    Gradcheck,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GlobalOpts {
    /// JSON training configuration
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Input: raw JSONL for prepare, prepared directory for train, split
    /// file for eval and project
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Output directory (prepare, train) or CSV file (project)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Drop neutral records and train two-class models
    #[arg(long, global = true)]
    pub two_class: bool,

    /// Architecture preset
    #[arg(long, global = true, value_name = "PRESET")]
    pub arch: Option<String>,

    #[arg(long, global = true, value_name = "LOSS")]
    pub loss: Option<LossKind>,

    #[arg(long, global = true, value_name = "OPT")]
    pub optimizer: Option<OptimizerKind>,

    #[arg(long, global = true, value_name = "N")]
    pub epochs: Option<usize>,

    #[arg(long, global = true, value_name = "N")]
    pub batch_size: Option<usize>,

    #[arg(long, global = true, value_name = "F")]
    pub lr: Option<f64>,

    #[arg(long, global = true, value_name = "F")]
    pub momentum: Option<f64>,

    /// Binary feature file referenced by `features_ref` records (prepare)
    #[arg(long, global = true, value_name = "PATH")]
    pub features: Option<PathBuf>,

    /// Model checkpoint (eval, project; warm start for train)
    #[arg(long, global = true, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,

    /// Trained text model whose penultimate features feed fusion models
    #[arg(long, global = true, value_name = "PATH")]
    pub text_checkpoint: Option<PathBuf>,

    /// GloVe-format word vectors holding the class-name embeddings
    #[arg(long, global = true, value_name = "PATH")]
    pub glove: Option<PathBuf>,

    /// Corrupt the backward pass of one operation (gradcheck self-test)
    #[arg(long, global = true, hide = true, value_name = "OP")]
    pub fault: Option<OpKind>,
}
