use leafnet::data::DatasetSplit;
use leafnet::eval::{confusion_matrix, predict_dataset, write_confusion_csv};
use leafnet::model_io::load_model;
use leafnet::{Error, Result};

use crate::EvalArgs;

const EVAL_BATCH: usize = 32;

pub fn run(args: EvalArgs) -> Result<()> {
    let loaded = load_model(&args.model)?;
    let split = DatasetSplit::from_directory(&args.data, args.val_split, args.seed)?;
    if split.class_names != loaded.class_names {
        return Err(Error::Dataset(format!(
            "dataset classes {:?} do not match the model's {:?}",
            split.class_names, loaded.class_names
        )));
    }

    let image_size = loaded.model.input_shape().dims()[0];
    let (predictions, labels, loss) =
        predict_dataset(&loaded.model, &split.val, image_size, EVAL_BATCH)?;
    let cm = confusion_matrix(&predictions, &labels, loaded.class_names.len())?
        .with_class_names(loaded.class_names)?;
    write_confusion_csv(&cm, &args.out)?;
    println!("accuracy={:.4} loss={:.4}", cm.accuracy(), loss);
    Ok(())
}
