//! 2x2 max pooling with stride 2.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const POOL: usize = 2;

/// Records where each pooled maximum came from, so the backward pass can
/// route gradients. Ties break to the first window element in row-major
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgmaxMask {
    input_dims: [usize; 4],
    output_dims: [usize; 4],
    /// Flat index into the input buffer, one entry per output element.
    winners: Vec<usize>,
}

impl ArgmaxMask {
    pub fn output_dims(&self) -> [usize; 4] {
        self.output_dims
    }
}

/// Halves H and W with floor; an odd trailing row/column is dropped.
pub fn maxpool_forward<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, ArgmaxMask)> {
    let [n_batch, h, w, c] = *input.dims() else {
        return Err(Error::shape(format!(
            "maxpool input must be rank 4, got {}",
            input.shape()
        )));
    };
    if h < POOL || w < POOL {
        return Err(Error::shape(format!(
            "maxpool needs H,W >= {POOL}, got {h}x{w}"
        )));
    }
    let oh = h / POOL;
    let ow = w / POOL;
    let x = input.data();
    let mut out = vec![T::zero(); n_batch * oh * ow * c];
    let mut winners = vec![0usize; out.len()];

    for n in 0..n_batch {
        for oy in 0..oh {
            for ox in 0..ow {
                let out_off = ((n * oh + oy) * ow + ox) * c;
                for ch in 0..c {
                    let mut best_idx = ((n * h + oy * POOL) * w + ox * POOL) * c + ch;
                    let mut best = x[best_idx];
                    for dy in 0..POOL {
                        for dx in 0..POOL {
                            let idx = ((n * h + oy * POOL + dy) * w + ox * POOL + dx) * c + ch;
                            if x[idx] > best {
                                best = x[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out[out_off + ch] = best;
                    winners[out_off + ch] = best_idx;
                }
            }
        }
    }
    Ok((
        Tensor::from_vec(&[n_batch, oh, ow, c], out)?,
        ArgmaxMask {
            input_dims: [n_batch, h, w, c],
            output_dims: [n_batch, oh, ow, c],
            winners,
        },
    ))
}

/// Routes each output gradient to its argmax position; everything else is 0.
pub fn maxpool_backward<T: Scalar>(mask: &ArgmaxMask, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
    if grad_out.dims() != mask.output_dims {
        return Err(Error::shape(format!(
            "maxpool grad_out shape {} does not match mask output {:?}",
            grad_out.shape(),
            mask.output_dims
        )));
    }
    let mut gi = vec![T::zero(); mask.input_dims.iter().product()];
    for (&winner, &g) in mask.winners.iter().zip(grad_out.data()) {
        gi[winner] = gi[winner] + g;
    }
    Tensor::from_vec(&mask.input_dims, gi)
}
