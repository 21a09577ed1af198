//! Loss, optimizer, metrics, the training loop, and gradient checking.

pub mod adam;
pub mod gradcheck;
pub mod loss;

pub use adam::{adam_step, AdamParams, AdamState};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use loss::{sparse_ce_grad, sparse_ce_loss};

use std::time::Instant;

use crate::data::{augment, batch_to_tensor, make_batches, AugmentConfig, BatchOrder, LabeledFile};
use crate::error::{Error, Result};
use crate::nn::{Mode, Model};
use crate::rng::epoch_seed;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Training hyperparameters and pipeline settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub val_split: f64,
    pub image_size: usize,
    pub seed: u64,
    pub augment: bool,
    pub adam: AdamParams,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 10,
            batch_size: 32,
            val_split: 0.2,
            image_size: 180,
            seed: 42,
            augment: true,
            adam: AdamParams::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::argument("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::argument("batch_size must be >= 1"));
        }
        if !(0.0 < self.val_split && self.val_split < 1.0) {
            return Err(Error::argument("val_split must be in (0,1)"));
        }
        if self.image_size == 0 {
            return Err(Error::argument("image_size must be >= 1"));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub duration_seconds: f64,
}

/// Index of the row maximum; ties go to the lowest index.
pub fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// How many rows' argmax equals the label.
pub fn count_correct<T: Scalar>(probabilities: &Tensor<T>, labels: &[usize]) -> Result<usize> {
    let [n, k] = *probabilities.dims() else {
        return Err(Error::shape("probabilities must be rank 2"));
    };
    if labels.len() != n {
        return Err(Error::Label(format!("{} labels for {n} rows", labels.len())));
    }
    Ok(probabilities
        .data()
        .chunks_exact(k)
        .zip(labels)
        .filter(|(row, label)| argmax(row) == **label)
        .count())
}

/// One optimization step on a prepared batch: forward, loss, backward, Adam.
/// Returns the batch-mean loss and the number of correct argmax predictions.
pub fn train_step<T: Scalar>(
    model: &mut Model<T>,
    state: &mut AdamState<T>,
    batch: &Tensor<T>,
    labels: &[usize],
) -> Result<(f64, usize)> {
    let trace = model.forward(batch, Mode::Train)?;
    let loss = sparse_ce_loss(trace.logits(), labels)?.as_f64();
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("non-finite training loss {loss}")));
    }
    let correct = count_correct(trace.probabilities(), labels)?;
    let grad = sparse_ce_grad(trace.logits(), labels)?;
    let grads = model.backward(&trace, &grad)?;
    adam_step(state, model.params_mut(), &grads)?;
    Ok((loss, correct))
}

/// Mean loss and accuracy of `model` over a file list, in eval mode and
/// fixed order.
pub fn evaluate<T: Scalar>(
    model: &Model<T>,
    files: &[LabeledFile],
    image_size: usize,
    batch_size: usize,
) -> Result<(f64, f64)> {
    if files.is_empty() {
        return Err(Error::argument("cannot evaluate an empty dataset"));
    }
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for batch in make_batches(files, BatchOrder::Sequential, batch_size, image_size)? {
        let batch = batch?;
        let tensor: Tensor<T> = batch_to_tensor(&batch.images)?;
        let trace = model.forward(&tensor, Mode::Eval)?;
        let loss = sparse_ce_loss(trace.logits(), &batch.labels)?.as_f64();
        loss_sum += loss * batch.labels.len() as f64;
        correct += count_correct(trace.probabilities(), &batch.labels)?;
    }
    let n = files.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

/// Trains `model` for `config.epochs` passes over `train_files`.
///
/// Each epoch reshuffles the training order with a seed derived from
/// `(config.seed, epoch)`, applies augmentation to training batches only
/// (never validation), and appends an [`EpochRecord`] carrying the running
/// train metrics and a full validation pass.
pub fn fit<T: Scalar>(
    model: Model<T>,
    train_files: &[LabeledFile],
    val_files: &[LabeledFile],
    config: &TrainingConfig,
) -> Result<(Model<T>, Vec<EpochRecord>)> {
    fit_with(model, train_files, val_files, config, |_| {})
}

/// [`fit`] with a callback invoked after each completed epoch.
pub fn fit_with<T: Scalar>(
    mut model: Model<T>,
    train_files: &[LabeledFile],
    val_files: &[LabeledFile],
    config: &TrainingConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Model<T>, Vec<EpochRecord>)> {
    config.validate()?;
    if train_files.is_empty() || val_files.is_empty() {
        return Err(Error::argument("train and validation splits must be non-empty"));
    }
    let mut state = AdamState::new(model.params(), config.adam);
    let mut records = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let started = Instant::now();
        let aug_cfg = AugmentConfig {
            seed: epoch_seed(config.seed, epoch as u64),
            ..AugmentConfig::default()
        };
        let mut aug_rng = aug_cfg.rng();

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let batches = make_batches(
            train_files,
            BatchOrder::Shuffled {
                base_seed: config.seed,
                epoch: epoch as u64,
            },
            config.batch_size,
            config.image_size,
        )?;
        for (batch_idx, batch) in batches.enumerate() {
            let batch = batch?;
            let images = if config.augment {
                augment(&batch.images, &aug_cfg, &mut aug_rng)?
            } else {
                batch.images
            };
            let tensor: Tensor<T> = batch_to_tensor(&images)?;
            let (loss, batch_correct) =
                train_step(&mut model, &mut state, &tensor, &batch.labels).map_err(|e| match e {
                    Error::Numeric(msg) => Error::Numeric(format!(
                        "{msg} (epoch {}, batch {batch_idx})",
                        epoch + 1
                    )),
                    other => other,
                })?;
            loss_sum += loss * batch.labels.len() as f64;
            correct += batch_correct;
        }
        let n_train = train_files.len() as f64;
        let (val_loss, val_acc) = evaluate(&model, val_files, config.image_size, config.batch_size)?;
        let record = EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / n_train,
            train_acc: correct as f64 / n_train,
            val_loss,
            val_acc,
            duration_seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        records.push(record);
    }
    Ok((model, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::softmax;

    #[test]
    fn argmax_tie_goes_to_lowest_index() {
        assert_eq!(argmax(&[0.5f32, 0.5, 0.0]), 0);
        assert_eq!(argmax(&[0.1f32, 0.9, 0.9]), 1);
        assert_eq!(argmax(&[1.0f32]), 0);
    }

    #[test]
    fn accuracy_counting() {
        let logits =
            Tensor::from_vec(&[3, 2], vec![2.0f64, 0.0, 0.0, 2.0, 2.0, 0.0]).unwrap();
        let probs = softmax(&logits).unwrap();
        // predictions: 0, 1, 0
        assert_eq!(count_correct(&probs, &[0, 1, 1]).unwrap(), 2);
        assert_eq!(count_correct(&probs, &[0, 1, 0]).unwrap(), 3);
        assert_eq!(count_correct(&probs, &[1, 0, 1]).unwrap(), 0);
    }

    #[test]
    fn config_validation() {
        let ok = TrainingConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.epochs, 10);
        assert_eq!(ok.batch_size, 32);
        assert_eq!(ok.val_split, 0.2);
        assert_eq!(ok.image_size, 180);

        let bad = TrainingConfig {
            epochs: 0,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainingConfig {
            val_split: 1.0,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
