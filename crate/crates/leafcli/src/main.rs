//! Leaf disease diagnosis command line: train a classifier on a
//! directory-per-class image tree, evaluate it, predict single images with
//! treatment recommendations, export t-SNE embeddings, and synthesize a
//! desk-scale dataset.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leafnet::Error;

#[derive(Parser)]
#[command(name = "leafcli", version, about = "Crop leaf disease classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier on a directory-per-class image tree.
    Train(TrainArgs),
    /// Evaluate a trained model and write the confusion matrix.
    Eval(EvalArgs),
    /// Classify one image and report treatment guidance as JSON.
    Predict(PredictArgs),
    /// Export a 2-d t-SNE embedding of the learned features.
    Embed(EmbedArgs),
    /// Generate the synthetic eight-class dataset.
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Dataset root: one subdirectory per class.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long = "img-size", default_value_t = 180)]
    img_size: usize,
    #[arg(long = "val-split", default_value_t = 0.2)]
    val_split: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Augment training batches (the default).
    #[arg(long, conflicts_with = "no_augment")]
    augment: bool,
    /// Disable augmentation.
    #[arg(long = "no-augment")]
    no_augment: bool,
    /// Output model file.
    #[arg(long, default_value = "model.leaf")]
    out: PathBuf,
    /// Output metrics CSV.
    #[arg(long, default_value = "metrics.csv")]
    metrics: PathBuf,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output confusion matrix CSV.
    #[arg(long, default_value = "confusion.csv")]
    out: PathBuf,
    /// Split seed; reuse the training seed to evaluate the exact
    /// validation files of that run.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "val-split", default_value_t = 0.2)]
    val_split: f64,
}

#[derive(clap::Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    /// Treatments JSON file (optional).
    #[arg(long)]
    treatments: Option<PathBuf>,
    #[arg(long = "top-k", default_value_t = 3)]
    top_k: usize,
}

#[derive(clap::Args)]
struct EmbedArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output embeddings CSV.
    #[arg(long, default_value = "embeddings.csv")]
    out: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Output directory for the generated tree.
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "per-class", default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Exit-code taxonomy: 2 usage/data, 3 model/numeric, 4 I/O.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Argument(_)
        | Error::Shape(_)
        | Error::Label(_)
        | Error::Dataset(_)
        | Error::Decode(_)
        | Error::Config(_) => 2,
        Error::Numeric(_) | Error::Contract(_) | Error::ModelFile(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Embed(args) => commands::embed::run(args),
        Command::Synth(args) => commands::synth::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
