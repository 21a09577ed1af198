//! Layer specifications, the sequential model container, shape inference,
//! parameter accounting, and the full forward/backward passes.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod pool;

pub use activation::{relu, relu_backward, softmax};
pub use conv::{conv2d_backward, conv2d_forward, KERNEL};
pub use dense::{dense_backward, dense_forward};
pub use pool::{maxpool_backward, maxpool_forward, ArgmaxMask, POOL};

use crate::error::{Error, Result};
use crate::init::glorot_uniform;
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

/// One layer of the sequential network. Kernel size (3x3, stride 1, same
/// padding) and pool size (2x2, stride 2) are fixed constants of the
/// variants, not knobs.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    /// Multiplies inputs by `factor` (pixel bytes to `[0,1]` by default).
    Rescale { factor: f64 },
    /// 3x3 same-padding convolution followed by ReLU.
    Conv2D { filters: usize },
    /// 2x2 max pooling, stride 2.
    MaxPool,
    Flatten,
    Dense { units: usize, activation: Activation },
    /// Final dense projection onto class logits plus softmax.
    SoftmaxOutput { classes: usize },
}

pub const RESCALE_FACTOR: f64 = 1.0 / 255.0;

/// The classifier stack used throughout: three conv/pool blocks with 16, 32,
/// and 64 filters, a 128-unit ReLU dense layer, and a softmax output.
pub fn classifier_layers(classes: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::Rescale {
            factor: RESCALE_FACTOR,
        },
        LayerSpec::Conv2D { filters: 16 },
        LayerSpec::MaxPool,
        LayerSpec::Conv2D { filters: 32 },
        LayerSpec::MaxPool,
        LayerSpec::Conv2D { filters: 64 },
        LayerSpec::MaxPool,
        LayerSpec::Flatten,
        LayerSpec::Dense {
            units: 128,
            activation: Activation::Relu,
        },
        LayerSpec::SoftmaxOutput { classes },
    ]
}

/// Per-sample output shape of each layer (no batch axis).
pub fn shape_infer(input_shape: &Shape, layers: &[LayerSpec]) -> Result<Vec<Shape>> {
    let mut current = input_shape.clone();
    let mut out = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        current = match layer {
            LayerSpec::Rescale { .. } => current,
            LayerSpec::Conv2D { filters } => {
                if *filters == 0 {
                    return Err(Error::shape("conv layer needs filters >= 1"));
                }
                match *current.dims() {
                    [h, w, _] => Shape::new(&[h, w, *filters])?,
                    _ => {
                        return Err(Error::shape(format!(
                            "layer {i}: Conv2D needs an (H,W,C) input, got {current}"
                        )))
                    }
                }
            }
            LayerSpec::MaxPool => match *current.dims() {
                [h, w, c] if h >= POOL && w >= POOL => Shape::new(&[h / POOL, w / POOL, c])?,
                _ => {
                    return Err(Error::shape(format!(
                        "layer {i}: MaxPool needs an (H,W,C) input with H,W >= {POOL}, got {current}"
                    )))
                }
            },
            LayerSpec::Flatten => Shape::new(&[current.len()])?,
            LayerSpec::Dense { units, .. } => {
                if *units == 0 {
                    return Err(Error::shape("dense layer needs units >= 1"));
                }
                match *current.dims() {
                    [_] => Shape::new(&[*units])?,
                    _ => {
                        return Err(Error::shape(format!(
                            "layer {i}: Dense needs a flat input, got {current}"
                        )))
                    }
                }
            }
            LayerSpec::SoftmaxOutput { classes } => {
                if *classes == 0 {
                    return Err(Error::shape("output layer needs classes >= 1"));
                }
                match *current.dims() {
                    [_] => Shape::new(&[*classes])?,
                    _ => {
                        return Err(Error::shape(format!(
                            "layer {i}: SoftmaxOutput needs a flat input, got {current}"
                        )))
                    }
                }
            }
        };
        out.push(current.clone());
    }
    Ok(out)
}

/// Weights and bias of one parameterized layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

/// One entry per layer; `None` for parameterless layers. Gradients returned
/// by [`Model::backward`] use the same structure.
pub type ParamSet<T> = Vec<Option<LayerParams<T>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    input_shape: Shape,
    layers: Vec<LayerSpec>,
    params: ParamSet<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything the forward pass produces. In `Train` mode the trace keeps
/// every intermediate activation and pooling mask for the backward pass; in
/// `Eval` mode only the penultimate features, logits, and probabilities are
/// kept.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    mode: Mode,
    /// `acts[i]` is the input to layer `i`; `acts[0]` is the batch.
    acts: Vec<Tensor<T>>,
    masks: Vec<Option<ArgmaxMask>>,
    penultimate: Tensor<T>,
    logits: Tensor<T>,
    probabilities: Tensor<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Post-ReLU activations of the layer feeding the softmax output
    /// (the learned feature vector, one row per sample).
    pub fn penultimate(&self) -> &Tensor<T> {
        &self.penultimate
    }

    pub fn logits(&self) -> &Tensor<T> {
        &self.logits
    }

    pub fn probabilities(&self) -> &Tensor<T> {
        &self.probabilities
    }
}

impl<T: Scalar> Model<T> {
    /// Builds a model with Glorot-uniform weights and zero biases.
    pub fn init(input_shape: Shape, layers: Vec<LayerSpec>, rng: &mut Rng) -> Result<Self> {
        Self::build(input_shape, layers, Some(rng))
    }

    /// Builds a model with all parameters zero.
    pub fn zeros(input_shape: Shape, layers: Vec<LayerSpec>) -> Result<Self> {
        Self::build(input_shape, layers, None)
    }

    fn build(input_shape: Shape, layers: Vec<LayerSpec>, mut rng: Option<&mut Rng>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("model needs at least one layer"));
        }
        if !matches!(layers.last(), Some(LayerSpec::SoftmaxOutput { .. })) {
            return Err(Error::shape("model must end with a SoftmaxOutput layer"));
        }
        let shapes = shape_infer(&input_shape, &layers)?;
        let mut params: ParamSet<T> = Vec::with_capacity(layers.len());
        let mut incoming = input_shape.clone();
        for (layer, out_shape) in layers.iter().zip(&shapes) {
            let entry = match layer {
                LayerSpec::Conv2D { filters } => {
                    let cin = incoming.dims()[2];
                    let fan_in = KERNEL * KERNEL * cin;
                    let fan_out = KERNEL * KERNEL * filters;
                    let wshape = [KERNEL, KERNEL, cin, *filters];
                    let weights = match rng.as_deref_mut() {
                        Some(r) => glorot_uniform(fan_in, fan_out, &wshape, r)?,
                        None => Tensor::zeros(&wshape)?,
                    };
                    Some(LayerParams {
                        weights,
                        bias: Tensor::zeros(&[*filters])?,
                    })
                }
                LayerSpec::Dense { units, .. } => {
                    let fan_in = incoming.dims()[0];
                    Some(Self::dense_params(fan_in, *units, rng.as_deref_mut())?)
                }
                LayerSpec::SoftmaxOutput { classes } => {
                    let fan_in = incoming.dims()[0];
                    Some(Self::dense_params(fan_in, *classes, rng.as_deref_mut())?)
                }
                _ => None,
            };
            params.push(entry);
            incoming = out_shape.clone();
        }
        Ok(Model {
            input_shape,
            layers,
            params,
        })
    }

    fn dense_params(fan_in: usize, units: usize, rng: Option<&mut Rng>) -> Result<LayerParams<T>> {
        let weights = match rng {
            Some(r) => glorot_uniform(fan_in, units, &[fan_in, units], r)?,
            None => Tensor::zeros(&[fan_in, units])?,
        };
        Ok(LayerParams {
            weights,
            bias: Tensor::zeros(&[units])?,
        })
    }

    pub fn input_shape(&self) -> &Shape {
        &self.input_shape
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn params(&self) -> &ParamSet<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet<T> {
        &mut self.params
    }

    /// Replaces the parameter set; shapes must match the existing one.
    pub fn set_params(&mut self, params: ParamSet<T>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::shape("parameter set length mismatch"));
        }
        for (new, old) in params.iter().zip(&self.params) {
            match (new, old) {
                (None, None) => {}
                (Some(a), Some(b))
                    if a.weights.shape() == b.weights.shape()
                        && a.bias.shape() == b.bias.shape() => {}
                _ => return Err(Error::shape("parameter tensor shape mismatch")),
            }
        }
        self.params = params;
        Ok(())
    }

    /// Number of classes of the output layer.
    pub fn classes(&self) -> usize {
        match self.layers.last() {
            Some(LayerSpec::SoftmaxOutput { classes }) => *classes,
            _ => unreachable!("validated at construction"),
        }
    }

    /// Width of the feature vector feeding the output layer.
    pub fn feature_width(&self) -> usize {
        match &self.params[self.layers.len() - 1] {
            Some(p) => p.weights.dims()[0],
            None => unreachable!("output layer always has parameters"),
        }
    }

    /// Per-layer trainable parameter counts.
    pub fn layer_param_counts(&self) -> Vec<usize> {
        self.params
            .iter()
            .map(|p| p.as_ref().map_or(0, |lp| lp.weights.len() + lp.bias.len()))
            .collect()
    }

    /// Total trainable parameter count.
    pub fn param_count(&self) -> usize {
        self.layer_param_counts().iter().sum()
    }

    /// Per-layer output shapes (no batch axis).
    pub fn output_shapes(&self) -> Vec<Shape> {
        shape_infer(&self.input_shape, &self.layers).expect("validated at construction")
    }

    fn check_batch(&self, batch: &Tensor<T>) -> Result<usize> {
        let dims = batch.dims();
        if dims.len() != self.input_shape.rank() + 1 || &dims[1..] != self.input_shape.dims() {
            return Err(Error::shape(format!(
                "batch shape {} does not extend input shape {}",
                batch.shape(),
                self.input_shape
            )));
        }
        Ok(dims[0])
    }

    /// Runs the network over a batch. Inputs are raw pixel values in
    /// `[0,255]`; the leading Rescale layer maps them to `[0,1]`.
    pub fn forward(&self, batch: &Tensor<T>, mode: Mode) -> Result<ForwardTrace<T>> {
        self.check_batch(batch)?;
        let keep = mode == Mode::Train;
        let n_layers = self.layers.len();
        let mut acts: Vec<Tensor<T>> = Vec::new();
        let mut masks: Vec<Option<ArgmaxMask>> = Vec::new();
        let mut current = batch.clone();
        let mut penultimate = None;
        let mut logits = None;

        for (i, layer) in self.layers.iter().enumerate() {
            if keep {
                acts.push(current.clone());
            }
            let mut mask = None;
            let next = match layer {
                LayerSpec::Rescale { factor } => {
                    let f = T::from_f64(*factor);
                    current.map(|v| v * f)
                }
                LayerSpec::Conv2D { .. } => {
                    let p = self.params[i].as_ref().expect("conv params");
                    let z = conv2d_forward(&current, &p.weights, &p.bias)?;
                    relu(&z)
                }
                LayerSpec::MaxPool => {
                    let (out, m) = maxpool_forward(&current)?;
                    mask = Some(m);
                    out
                }
                LayerSpec::Flatten => {
                    let n = current.dims()[0];
                    let per_sample: usize = current.dims()[1..].iter().product();
                    current.clone().reshape(&[n, per_sample])?
                }
                LayerSpec::Dense { activation, .. } => {
                    let p = self.params[i].as_ref().expect("dense params");
                    let z = dense_forward(&current, &p.weights, &p.bias)?;
                    match activation {
                        Activation::Relu => relu(&z),
                        Activation::Linear => z,
                    }
                }
                LayerSpec::SoftmaxOutput { .. } => {
                    let p = self.params[i].as_ref().expect("output params");
                    penultimate = Some(current.clone());
                    let z = dense_forward(&current, &p.weights, &p.bias)?;
                    logits = Some(z.clone());
                    z
                }
            };
            if keep {
                masks.push(mask);
            }
            if i == n_layers - 1 {
                let logits = logits.expect("last layer is SoftmaxOutput");
                let probabilities = softmax(&logits)?;
                return Ok(ForwardTrace {
                    mode,
                    acts,
                    masks,
                    penultimate: penultimate.expect("set with logits"),
                    logits,
                    probabilities,
                });
            }
            current = next;
        }
        unreachable!("loop returns on the last layer")
    }

    /// Chains layer backward passes in reverse order, producing one gradient
    /// entry per parameter entry. `grad_logits` is the loss gradient with
    /// respect to the pre-softmax logits.
    pub fn backward(&self, trace: &ForwardTrace<T>, grad_logits: &Tensor<T>) -> Result<ParamSet<T>> {
        if trace.mode != Mode::Train {
            return Err(Error::Contract(
                "backward needs a trace recorded in Train mode".into(),
            ));
        }
        if trace.acts.len() != self.layers.len() {
            return Err(Error::Contract(
                "trace does not match this model's layer count".into(),
            ));
        }
        if grad_logits.shape() != trace.logits.shape() {
            return Err(Error::shape(format!(
                "grad_logits shape {} does not match logits {}",
                grad_logits.shape(),
                trace.logits.shape()
            )));
        }
        let n_layers = self.layers.len();
        let mut grads: ParamSet<T> = (0..n_layers).map(|_| None).collect();
        let mut grad = grad_logits.clone();

        for i in (0..n_layers).rev() {
            let input = &trace.acts[i];
            grad = match &self.layers[i] {
                LayerSpec::Rescale { factor } => {
                    let f = T::from_f64(*factor);
                    grad.map(|v| v * f)
                }
                LayerSpec::Conv2D { .. } => {
                    let p = self.params[i].as_ref().expect("conv params");
                    // Post-ReLU output gates the gradient (positive iff the
                    // pre-activation was positive).
                    let out = self.layer_output(trace, i);
                    let g_z = relu_backward(out, &grad)?;
                    let (gi, gw, gb) = conv2d_backward(input, &p.weights, &g_z)?;
                    grads[i] = Some(LayerParams {
                        weights: gw,
                        bias: gb,
                    });
                    gi
                }
                LayerSpec::MaxPool => {
                    let mask = trace.masks[i].as_ref().ok_or_else(|| {
                        Error::Contract("trace is missing a pooling mask".into())
                    })?;
                    maxpool_backward(mask, &grad)?
                }
                LayerSpec::Flatten => grad.reshape(input.dims())?,
                LayerSpec::Dense { activation, .. } => {
                    let p = self.params[i].as_ref().expect("dense params");
                    let g_z = match activation {
                        Activation::Relu => {
                            let out = self.layer_output(trace, i);
                            relu_backward(out, &grad)?
                        }
                        Activation::Linear => grad,
                    };
                    let (gi, gw, gb) = dense_backward(input, &p.weights, &g_z)?;
                    grads[i] = Some(LayerParams {
                        weights: gw,
                        bias: gb,
                    });
                    gi
                }
                LayerSpec::SoftmaxOutput { .. } => {
                    let p = self.params[i].as_ref().expect("output params");
                    let (gi, gw, gb) = dense_backward(input, &p.weights, &grad)?;
                    grads[i] = Some(LayerParams {
                        weights: gw,
                        bias: gb,
                    });
                    gi
                }
            };
        }
        Ok(grads)
    }

    fn layer_output<'a>(&self, trace: &'a ForwardTrace<T>, i: usize) -> &'a Tensor<T> {
        if i + 1 == self.layers.len() {
            &trace.logits
        } else {
            &trace.acts[i + 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::shape;

    fn canonical() -> (Shape, Vec<LayerSpec>) {
        (shape(&[180, 180, 3]), classifier_layers(8))
    }

    #[test]
    fn shape_infer_reproduces_summary_table() {
        let (input, layers) = canonical();
        let shapes = shape_infer(&input, &layers).unwrap();
        let expect: Vec<Vec<usize>> = vec![
            vec![180, 180, 3],
            vec![180, 180, 16],
            vec![90, 90, 16],
            vec![90, 90, 32],
            vec![45, 45, 32],
            vec![45, 45, 64],
            vec![22, 22, 64],
            vec![30976],
            vec![128],
            vec![8],
        ];
        let got: Vec<Vec<usize>> = shapes.iter().map(|s| s.dims().to_vec()).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn param_counts_reproduce_summary_table() {
        let (input, layers) = canonical();
        let model = Model::<f32>::zeros(input, layers).unwrap();
        let counts = model.layer_param_counts();
        assert_eq!(
            counts,
            vec![0, 448, 0, 4_640, 0, 18_496, 0, 0, 3_965_056, 1_032]
        );
        assert_eq!(model.param_count(), 3_989_672);
        assert_eq!(model.feature_width(), 128);
        assert_eq!(model.classes(), 8);
    }

    #[test]
    fn parameterless_model_counts_zero() {
        // Rescale + Flatten contribute nothing; only the output layer has
        // parameters.
        let layers = vec![
            LayerSpec::Rescale { factor: RESCALE_FACTOR },
            LayerSpec::Flatten,
            LayerSpec::SoftmaxOutput { classes: 2 },
        ];
        let model = Model::<f32>::zeros(shape(&[4, 4, 1]), layers).unwrap();
        assert_eq!(model.layer_param_counts(), vec![0, 0, (16 + 1) * 2]);
    }

    #[test]
    fn dense_before_flatten_is_rejected() {
        let layers = vec![
            LayerSpec::Dense {
                units: 4,
                activation: Activation::Relu,
            },
            LayerSpec::SoftmaxOutput { classes: 2 },
        ];
        let err = shape_infer(&shape(&[4, 4, 2]), &layers).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn maxpool_transition_matches_table() {
        let shapes = shape_infer(&shape(&[45, 45, 32]), &[LayerSpec::MaxPool]).unwrap();
        assert_eq!(shapes[0].dims(), &[22, 22, 32]);
    }

    #[test]
    fn zero_model_outputs_uniform_probabilities() {
        let layers = classifier_layers(8);
        let model = Model::<f32>::zeros(shape(&[16, 16, 3]), layers).unwrap();
        let batch = Tensor::zeros(&[2, 16, 16, 3]).unwrap();
        let trace = model.forward(&batch, Mode::Eval).unwrap();
        assert_eq!(trace.probabilities().dims(), &[2, 8]);
        assert!(trace
            .probabilities()
            .iter()
            .all(|&p| (p - 0.125).abs() < 1e-6));
    }

    #[test]
    fn probability_rows_sum_to_one() {
        let mut rng = Rng::seeded(13);
        let model: Model<f32> =
            Model::init(shape(&[16, 16, 3]), classifier_layers(8), &mut rng).unwrap();
        let mut batch = Tensor::zeros(&[3, 16, 16, 3]).unwrap();
        for v in batch.data_mut() {
            *v = rng.next_uniform(0.0f32, 255.0).unwrap();
        }
        let trace = model.forward(&batch, Mode::Eval).unwrap();
        for row in 0..3 {
            let sum: f32 = trace.probabilities().data()[row * 8..(row + 1) * 8]
                .iter()
                .sum();
            assert!((sum - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn eval_forward_is_deterministic() {
        let mut rng = Rng::seeded(99);
        let model: Model<f32> =
            Model::init(shape(&[16, 16, 3]), classifier_layers(5), &mut rng).unwrap();
        let mut batch = Tensor::zeros(&[1, 16, 16, 3]).unwrap();
        for v in batch.data_mut() {
            *v = rng.next_uniform(0.0f32, 255.0).unwrap();
        }
        let a = model.forward(&batch, Mode::Eval).unwrap();
        let b = model.forward(&batch, Mode::Eval).unwrap();
        assert_eq!(a.probabilities().data(), b.probabilities().data());
    }

    #[test]
    fn backward_structure_mirrors_params() {
        let mut rng = Rng::seeded(5);
        let model: Model<f64> =
            Model::init(shape(&[8, 8, 2]), classifier_layers(3), &mut rng).unwrap();
        let mut batch = Tensor::zeros(&[2, 8, 8, 2]).unwrap();
        for v in batch.data_mut() {
            *v = rng.next_uniform(0.0f64, 255.0).unwrap();
        }
        let trace = model.forward(&batch, Mode::Train).unwrap();

        // Zero upstream gradient gives zero parameter gradients.
        let zero = Tensor::zeros(&[2, 3]).unwrap();
        let grads = model.backward(&trace, &zero).unwrap();
        for g in grads.iter().flatten() {
            assert!(g.weights.iter().all(|&v| v == 0.0));
            assert!(g.bias.iter().all(|&v| v == 0.0));
        }

        // Gradient set count and shapes equal parameter set count and shapes.
        let mut g = Tensor::zeros(&[2, 3]).unwrap();
        g.data_mut()[0] = 1.0;
        let grads = model.backward(&trace, &g).unwrap();
        assert_eq!(grads.len(), model.params().len());
        for (g, p) in grads.iter().zip(model.params()) {
            match (g, p) {
                (None, None) => {}
                (Some(g), Some(p)) => {
                    assert_eq!(g.weights.shape(), p.weights.shape());
                    assert_eq!(g.bias.shape(), p.bias.shape());
                }
                _ => panic!("gradient/parameter structure mismatch"),
            }
        }
    }

    #[test]
    fn eval_trace_is_rejected_by_backward() {
        let model: Model<f32> = Model::zeros(shape(&[4, 4, 1]), vec![
            LayerSpec::Flatten,
            LayerSpec::SoftmaxOutput { classes: 2 },
        ])
        .unwrap();
        let batch = Tensor::zeros(&[1, 4, 4, 1]).unwrap();
        let trace = model.forward(&batch, Mode::Eval).unwrap();
        let g = Tensor::zeros(&[1, 2]).unwrap();
        assert!(matches!(
            model.backward(&trace, &g),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn batch_shape_must_extend_input_shape() {
        let model: Model<f32> = Model::zeros(shape(&[4, 4, 1]), vec![
            LayerSpec::Flatten,
            LayerSpec::SoftmaxOutput { classes: 2 },
        ])
        .unwrap();
        let bad = Tensor::zeros(&[1, 4, 5, 1]).unwrap();
        assert!(model.forward(&bad, Mode::Eval).is_err());
    }
}
