//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::nn::{LayerParams, ParamSet};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Optimizer hyperparameters. Defaults: lr 1e-3, beta1 0.9, beta2 0.999,
/// epsilon 1e-7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

/// Per-parameter first/second moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    t: u64,
    moments: Vec<Option<(LayerParams<T>, LayerParams<T>)>>, // (m, v) mirroring params
    hyper: AdamParams,
}

impl<T: Scalar> AdamState<T> {
    /// Fresh state with zero moments mirroring `params`.
    pub fn new(params: &ParamSet<T>, hyper: AdamParams) -> Self {
        let moments = params
            .iter()
            .map(|p| {
                p.as_ref().map(|lp| {
                    let zero = |t: &Tensor<T>| Tensor::zeros(t.dims()).expect("valid dims");
                    (
                        LayerParams {
                            weights: zero(&lp.weights),
                            bias: zero(&lp.bias),
                        },
                        LayerParams {
                            weights: zero(&lp.weights),
                            bias: zero(&lp.bias),
                        },
                    )
                })
            })
            .collect();
        AdamState {
            t: 0,
            moments,
            hyper,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn hyper(&self) -> AdamParams {
        self.hyper
    }
}

fn update_tensor<T: Scalar>(
    theta: &mut Tensor<T>,
    grad: &Tensor<T>,
    m: &mut Tensor<T>,
    v: &mut Tensor<T>,
    hyper: &AdamParams,
    bias1: f64,
    bias2: f64,
) -> Result<()> {
    if grad.shape() != theta.shape() {
        return Err(Error::shape("gradient shape does not match parameter"));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient in adam step".into()));
    }
    let b1 = T::from_f64(hyper.beta1);
    let b2 = T::from_f64(hyper.beta2);
    let one = T::one();
    let lr = T::from_f64(hyper.lr);
    let eps = T::from_f64(hyper.epsilon);
    let inv_bias1 = T::from_f64(1.0 / bias1);
    let inv_bias2 = T::from_f64(1.0 / bias2);

    let td = theta.data_mut();
    let gd = grad.data();
    let md = m.data_mut();
    let vd = v.data_mut();
    for i in 0..td.len() {
        let g = gd[i];
        md[i] = b1 * md[i] + (one - b1) * g;
        vd[i] = b2 * vd[i] + (one - b2) * g * g;
        let m_hat = md[i] * inv_bias1;
        let v_hat = vd[i] * inv_bias2;
        td[i] = td[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// One Adam step over an entire parameter set:
/// `t += 1; m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;`
/// `theta -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)`.
pub fn adam_step<T: Scalar>(
    state: &mut AdamState<T>,
    params: &mut ParamSet<T>,
    grads: &ParamSet<T>,
) -> Result<()> {
    if params.len() != state.moments.len() || grads.len() != params.len() {
        return Err(Error::shape("optimizer state does not match parameters"));
    }
    state.t += 1;
    let bias1 = 1.0 - state.hyper.beta1.powi(state.t as i32);
    let bias2 = 1.0 - state.hyper.beta2.powi(state.t as i32);
    let hyper = state.hyper;

    for ((param, grad), moment) in params.iter_mut().zip(grads).zip(&mut state.moments) {
        match (param, grad, moment) {
            (None, None, None) => {}
            (Some(p), Some(g), Some((m, v))) => {
                update_tensor(
                    &mut p.weights,
                    &g.weights,
                    &mut m.weights,
                    &mut v.weights,
                    &hyper,
                    bias1,
                    bias2,
                )?;
                update_tensor(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, &hyper, bias1, bias2)?;
            }
            _ => return Err(Error::shape("parameter/gradient structure mismatch")),
        }
    }
    Ok(())
}
