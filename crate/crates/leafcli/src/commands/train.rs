use leafnet::data::DatasetSplit;
use leafnet::eval::write_metrics_csv;
use leafnet::model_io::save_model;
use leafnet::nn::{classifier_layers, Model};
use leafnet::train::{fit_with, TrainingConfig};
use leafnet::{Result, Rng, Shape};

use crate::TrainArgs;

/// Stream dedicated to model weight initialization.
const INIT_STREAM: u64 = 0x1417;

pub fn run(args: TrainArgs) -> Result<()> {
    let config = TrainingConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        val_split: args.val_split,
        image_size: args.img_size,
        seed: args.seed,
        augment: !args.no_augment,
        ..TrainingConfig::default()
    };
    config.validate()?;

    let split = DatasetSplit::from_directory(&args.data, config.val_split, config.seed)?;
    eprintln!(
        "dataset: {} classes, {} train / {} val images",
        split.class_names.len(),
        split.train.len(),
        split.val.len()
    );

    let input_shape = Shape::new(&[config.image_size, config.image_size, 3])?;
    let mut init_rng = Rng::new(config.seed, INIT_STREAM);
    let model: Model<f32> = Model::init(
        input_shape,
        classifier_layers(split.class_names.len()),
        &mut init_rng,
    )?;

    let epochs = config.epochs;
    let (trained, mut records) = fit_with(model, &split.train, &split.val, &config, |r| {
        println!(
            "epoch {}/{} train_loss={:.4} train_acc={:.4} val_loss={:.4} val_acc={:.4}",
            r.epoch, epochs, r.train_loss, r.train_acc, r.val_loss, r.val_acc
        );
    })?;

    save_model(&trained, &split.class_names, &args.out)?;
    // Wall-clock durations vary run to run; the exported artifact zeroes
    // them so identical invocations produce byte-identical files.
    for r in &mut records {
        r.duration_seconds = 0.0;
    }
    write_metrics_csv(&records, &args.metrics)?;
    eprintln!(
        "wrote model to {} and metrics to {}",
        args.out.display(),
        args.metrics.display()
    );
    Ok(())
}
