//! Fully connected layer: `out = input . weights + bias`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

fn dims2<T: Scalar>(t: &Tensor<T>, what: &str) -> Result<(usize, usize)> {
    match *t.dims() {
        [a, b] => Ok((a, b)),
        _ => Err(Error::shape(format!(
            "{what} must be rank 2, got {}",
            t.shape()
        ))),
    }
}

/// Activation is not applied here; the layer wrapper owns that.
pub fn dense_forward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (n, k) = dims2(input, "dense input")?;
    let (wk, u) = dims2(weights, "dense weights")?;
    if wk != k {
        return Err(Error::shape(format!(
            "dense input width {k} does not match weights ({wk},{u})"
        )));
    }
    if bias.dims() != [u] {
        return Err(Error::shape(format!(
            "dense bias must have shape ({u}), got {}",
            bias.shape()
        )));
    }
    let x = input.data();
    let w = weights.data();
    let mut out = vec![T::zero(); n * u];
    for row in 0..n {
        let out_row = &mut out[row * u..(row + 1) * u];
        out_row.copy_from_slice(bias.data());
        for col in 0..k {
            let xv = x[row * k + col];
            let w_row = &w[col * u..(col + 1) * u];
            for (o, &wv) in out_row.iter_mut().zip(w_row) {
                *o = *o + xv * wv;
            }
        }
    }
    Tensor::from_vec(&[n, u], out)
}

/// `grad_input = grad_out . Wt`, `grad_weights = Xt . grad_out`,
/// `grad_bias` = column sums of `grad_out`.
pub fn dense_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (n, k) = dims2(input, "dense input")?;
    let (wk, u) = dims2(weights, "dense weights")?;
    if wk != k {
        return Err(Error::shape("dense input/weights mismatch"));
    }
    if grad_out.dims() != [n, u] {
        return Err(Error::shape(format!(
            "dense grad_out must be ({n},{u}), got {}",
            grad_out.shape()
        )));
    }
    let x = input.data();
    let w = weights.data();
    let g = grad_out.data();
    let mut gi = vec![T::zero(); n * k];
    let mut gw = vec![T::zero(); k * u];
    let mut gb = vec![T::zero(); u];

    for row in 0..n {
        let g_row = &g[row * u..(row + 1) * u];
        for (acc, &gv) in gb.iter_mut().zip(g_row) {
            *acc = *acc + gv;
        }
        for col in 0..k {
            let w_row = &w[col * u..(col + 1) * u];
            let gw_row = &mut gw[col * u..(col + 1) * u];
            let xv = x[row * k + col];
            let mut acc = T::zero();
            for ((gw_v, &w_v), &g_v) in gw_row.iter_mut().zip(w_row).zip(g_row) {
                *gw_v = *gw_v + xv * g_v;
                acc = acc + w_v * g_v;
            }
            gi[row * k + col] = acc;
        }
    }
    Ok((
        Tensor::from_vec(&[n, k], gi)?,
        Tensor::from_vec(&[k, u], gw)?,
        Tensor::from_vec(&[u], gb)?,
    ))
}
