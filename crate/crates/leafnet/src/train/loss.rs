//! Sparse categorical cross-entropy over integer labels.

use crate::error::{Error, Result};
use crate::nn::softmax;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

fn check_labels<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<(usize, usize)> {
    let [n, k] = *logits.dims() else {
        return Err(Error::shape(format!(
            "logits must be rank 2, got {}",
            logits.shape()
        )));
    };
    if labels.len() != n {
        return Err(Error::Label(format!(
            "{} labels for a batch of {n}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::Label(format!("label {bad} out of range [0,{k})")));
    }
    Ok((n, k))
}

/// Mean over the batch of `-log softmax(logits)[label]`, computed in the
/// log-sum-exp form so large logits cannot overflow.
pub fn sparse_ce_loss<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<T> {
    let (n, k) = check_labels(logits, labels)?;
    if n == 0 {
        return Err(Error::argument("loss needs at least one sample"));
    }
    let z = logits.data();
    let mut total = T::zero();
    for (row, &label) in labels.iter().enumerate() {
        let z_row = &z[row * k..(row + 1) * k];
        let max = z_row.iter().cloned().fold(z_row[0], T::max);
        let mut sum = T::zero();
        for &v in z_row {
            sum += (v - max).exp();
        }
        // -log p = logsumexp(z) - z_label
        total += (max + sum.ln()) - z_row[label];
    }
    Ok(total / T::from_f64(n as f64))
}

/// Gradient of [`sparse_ce_loss`] with respect to the logits:
/// `(softmax(logits) - onehot(labels)) / N`.
pub fn sparse_ce_grad<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<Tensor<T>> {
    let (n, k) = check_labels(logits, labels)?;
    let mut grad = softmax(logits)?;
    let inv_n = T::one() / T::from_f64(n as f64);
    let data = grad.data_mut();
    for (row, &label) in labels.iter().enumerate() {
        data[row * k + label] -= T::one();
        for v in &mut data[row * k..(row + 1) * k] {
            *v = *v * inv_n;
        }
    }
    Ok(grad)
}
