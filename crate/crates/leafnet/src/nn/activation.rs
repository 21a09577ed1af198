//! Elementwise activations and the softmax output transform.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// `max(x, 0)` elementwise.
pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Passes gradient where `x > 0`; the gradient at exactly 0 is defined as 0.
pub fn relu_backward<T: Scalar>(x: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
    if x.shape() != grad_out.shape() {
        return Err(Error::shape(format!(
            "relu_backward shapes differ: {} vs {}",
            x.shape(),
            grad_out.shape()
        )));
    }
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&v, &g)| if v > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::from_vec(x.dims(), data)
}

/// Row-wise softmax of a logit matrix (N,K), stabilized by subtracting the
/// row maximum before exponentiation.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let [n, k] = *logits.dims() else {
        return Err(Error::shape(format!(
            "softmax expects rank-2 logits, got {}",
            logits.shape()
        )));
    };
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("softmax input contains non-finite values".into()));
    }
    let z = logits.data();
    let mut out = vec![T::zero(); n * k];
    for row in 0..n {
        let z_row = &z[row * k..(row + 1) * k];
        let max = z_row.iter().cloned().fold(z_row[0], T::max);
        let out_row = &mut out[row * k..(row + 1) * k];
        let mut sum = T::zero();
        for (o, &v) in out_row.iter_mut().zip(z_row) {
            *o = (v - max).exp();
            sum += *o;
        }
        for o in out_row.iter_mut() {
            *o = *o / sum;
        }
    }
    Tensor::from_vec(&[n, k], out)
}
