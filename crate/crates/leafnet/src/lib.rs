//! From-scratch CNN training and inference engine for leaf disease
//! classification: deterministic tensors and RNG, hand-derived layer
//! gradients, an Adam training loop, a directory-based image pipeline with
//! augmentation, evaluation analytics (confusion matrix, t-SNE), and a
//! binary model container.
//!
//! All numeric code is generic over the scalar type ([`Scalar`]): training
//! runs in `f32`, while the gradient-check harness instantiates the same
//! code at `f64`.

pub mod data;
pub mod error;
pub mod eval;
pub mod init;
pub mod model_io;
pub mod nn;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod train;
pub mod treatment;

pub use error::{Error, ModelFileError, Result};
pub use rng::Rng;
pub use scalar::Scalar;
pub use tensor::{approx_equal, Shape, Tensor};

/// Concrete aliases for the two supported scalar widths.
pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type Model32 = nn::Model<f32>;
pub type Model64 = nn::Model<f64>;
