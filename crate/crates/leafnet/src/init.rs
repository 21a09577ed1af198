//! Weight initialization.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Glorot (Xavier) uniform initialization: i.i.d. samples from
/// `uniform(-L, L)` with `L = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Scalar>(
    fan_in: usize,
    fan_out: usize,
    shape: &[usize],
    rng: &mut Rng,
) -> Result<Tensor<T>> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::argument("fan_in and fan_out must be >= 1"));
    }
    let limit = T::from_f64((6.0 / (fan_in + fan_out) as f64).sqrt());
    let mut t = Tensor::zeros(shape)?;
    for v in t.data_mut() {
        *v = rng.next_uniform(-limit, limit)?;
    }
    Ok(t)
}
