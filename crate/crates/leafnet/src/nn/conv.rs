//! 3x3 convolution, stride 1, same padding (one pixel of zero fill).
//!
//! This is the direct loop evaluation; it is the reference semantics for the
//! layer and the only path. The inner loop runs over the filter axis, which
//! is contiguous for the weights, the output, and the gradients.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const KERNEL: usize = 3;

fn dims4<T: Scalar>(t: &Tensor<T>, what: &str) -> Result<(usize, usize, usize, usize)> {
    match *t.dims() {
        [n, h, w, c] => Ok((n, h, w, c)),
        _ => Err(Error::shape(format!(
            "{what} must be rank 4, got {}",
            t.shape()
        ))),
    }
}

fn check_shapes<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(usize, usize, usize, usize, usize)> {
    let (n, h, w, cin) = dims4(input, "conv input")?;
    let (kh, kw, wc, f) = dims4(weights, "conv weights")?;
    if kh != KERNEL || kw != KERNEL {
        return Err(Error::shape(format!(
            "conv kernel must be {KERNEL}x{KERNEL}, got {kh}x{kw}"
        )));
    }
    if wc != cin {
        return Err(Error::shape(format!(
            "conv weights expect {wc} input channels, input has {cin}"
        )));
    }
    if bias.dims() != [f] {
        return Err(Error::shape(format!(
            "conv bias must have shape ({f}), got {}",
            bias.shape()
        )));
    }
    Ok((n, h, w, cin, f))
}

/// `out[n,y,x,f] = bias[f] + sum over (ky,kx,c) of
/// input[n, y+ky-1, x+kx-1, c] * weights[ky,kx,c,f]`, out-of-range taps 0.
/// No activation is applied here.
pub fn conv2d_forward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (n_batch, h, w, cin, f) = check_shapes(input, weights, bias)?;
    let x = input.data();
    let wt = weights.data();
    let b = bias.data();
    let mut out = vec![T::zero(); n_batch * h * w * f];

    for n in 0..n_batch {
        for y in 0..h {
            for xcol in 0..w {
                let out_off = ((n * h + y) * w + xcol) * f;
                let out_px = &mut out[out_off..out_off + f];
                out_px.copy_from_slice(b);
                for ky in 0..KERNEL {
                    let sy = y + ky;
                    if sy < 1 || sy > h {
                        continue;
                    }
                    let sy = sy - 1;
                    for kx in 0..KERNEL {
                        let sx = xcol + kx;
                        if sx < 1 || sx > w {
                            continue;
                        }
                        let sx = sx - 1;
                        let in_off = ((n * h + sy) * w + sx) * cin;
                        let w_off = (ky * KERNEL + kx) * cin * f;
                        for c in 0..cin {
                            let xv = x[in_off + c];
                            let w_row = &wt[w_off + c * f..w_off + (c + 1) * f];
                            for (o, &wv) in out_px.iter_mut().zip(w_row) {
                                *o = *o + xv * wv;
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[n_batch, h, w, f], out)
}

/// Exact gradients of [`conv2d_forward`] with respect to input, weights,
/// and bias. `grad_bias[f]` is the sum of `grad_out[.., f]`.
pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (n_batch, h, w, cin) = dims4(input, "conv input")?;
    let (_, _, wc, f) = dims4(weights, "conv weights")?;
    if wc != cin {
        return Err(Error::shape("conv weights/input channel mismatch"));
    }
    if grad_out.dims() != [n_batch, h, w, f] {
        return Err(Error::shape(format!(
            "conv grad_out must be ({n_batch},{h},{w},{f}), got {}",
            grad_out.shape()
        )));
    }
    let x = input.data();
    let wt = weights.data();
    let g = grad_out.data();
    let mut gi = vec![T::zero(); x.len()];
    let mut gw = vec![T::zero(); wt.len()];
    let mut gb = vec![T::zero(); f];

    for n in 0..n_batch {
        for y in 0..h {
            for xcol in 0..w {
                let g_off = ((n * h + y) * w + xcol) * f;
                let g_px = &g[g_off..g_off + f];
                for (acc, &gv) in gb.iter_mut().zip(g_px) {
                    *acc = *acc + gv;
                }
                for ky in 0..KERNEL {
                    let sy = y + ky;
                    if sy < 1 || sy > h {
                        continue;
                    }
                    let sy = sy - 1;
                    for kx in 0..KERNEL {
                        let sx = xcol + kx;
                        if sx < 1 || sx > w {
                            continue;
                        }
                        let sx = sx - 1;
                        let in_off = ((n * h + sy) * w + sx) * cin;
                        let w_off = (ky * KERNEL + kx) * cin * f;
                        for c in 0..cin {
                            let xv = x[in_off + c];
                            let base = w_off + c * f;
                            let mut acc = T::zero();
                            for fi in 0..f {
                                let gv = g_px[fi];
                                gw[base + fi] = gw[base + fi] + xv * gv;
                                acc = acc + wt[base + fi] * gv;
                            }
                            gi[in_off + c] = gi[in_off + c] + acc;
                        }
                    }
                }
            }
        }
    }
    Ok((
        Tensor::from_vec(input.dims(), gi)?,
        Tensor::from_vec(weights.dims(), gw)?,
        Tensor::from_vec(&[f], gb)?,
    ))
}
