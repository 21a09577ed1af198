//! Finite-difference verification of the analytic gradients.

use crate::error::Result;
use crate::nn::{Mode, Model, ParamSet};
use crate::rng::Rng;
use crate::train::loss::{sparse_ce_grad, sparse_ce_loss};
use crate::tensor::Tensor;

/// Outcome of a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub coords_checked: usize,
    pub max_rel_err: f64,
    pub tol: f64,
    pub passed: bool,
    /// (layer index, tensor name, coordinate) of the worst coordinate.
    pub worst: Option<(usize, &'static str, usize)>,
}

/// At most this many coordinates are probed per tensor; larger tensors get
/// a seeded random subsample.
const COORDS_PER_TENSOR: usize = 240;

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-10 {
        0.0
    } else {
        (analytic - numeric).abs() / denom
    }
}

fn set_coord(set: &mut ParamSet<f64>, layer: usize, name: &str, coord: usize, value: f64) {
    let lp = set[layer].as_mut().expect("same structure");
    let tensor = if name == "weights" {
        &mut lp.weights
    } else {
        &mut lp.bias
    };
    tensor.data_mut()[coord] = value;
}

fn pick_coords(len: usize, rng: &mut Rng) -> Vec<usize> {
    if len <= COORDS_PER_TENSOR {
        return (0..len).collect();
    }
    // Partial Fisher-Yates: the first COORDS_PER_TENSOR entries of a
    // seeded permutation, so coordinates are distinct.
    let mut all: Vec<usize> = (0..len).collect();
    for i in 0..COORDS_PER_TENSOR {
        let j = i + rng.next_below((len - i) as u32) as usize;
        all.swap(i, j);
    }
    all.truncate(COORDS_PER_TENSOR);
    all
}

/// Core comparison: central differences of `loss_fn` against the provided
/// analytic gradients, over every (sub-sampled) parameter coordinate.
pub(crate) fn check_against<F>(
    params: &ParamSet<f64>,
    analytic: &ParamSet<f64>,
    tol: f64,
    mut loss_fn: F,
) -> Result<GradCheckReport>
where
    F: FnMut(&ParamSet<f64>) -> Result<f64>,
{
    let mut rng = Rng::new(0x5eed, 0x6c);
    let mut scratch = params.clone();
    let mut report = GradCheckReport {
        coords_checked: 0,
        max_rel_err: 0.0,
        tol,
        passed: true,
        worst: None,
    };

    for layer in 0..params.len() {
        let Some(p) = &params[layer] else { continue };
        let a = analytic[layer]
            .as_ref()
            .expect("analytic gradients mirror parameters");
        for (name, theta, grad) in [
            ("weights", &p.weights, &a.weights),
            ("bias", &p.bias, &a.bias),
        ] {
            for coord in pick_coords(theta.len(), &mut rng) {
                let original = theta.data()[coord];
                let h = 1e-5 * original.abs().max(1.0);

                set_coord(&mut scratch, layer, name, coord, original + h);
                let plus = loss_fn(&scratch)?;
                set_coord(&mut scratch, layer, name, coord, original - h);
                let minus = loss_fn(&scratch)?;
                set_coord(&mut scratch, layer, name, coord, original);

                let numeric = (plus - minus) / (2.0 * h);
                let err = rel_err(grad.data()[coord], numeric);
                report.coords_checked += 1;
                if err > report.max_rel_err {
                    report.max_rel_err = err;
                    report.worst = Some((layer, name, coord));
                }
            }
        }
    }
    report.passed = report.max_rel_err <= tol;
    Ok(report)
}

/// Compares every analytic parameter gradient of `model` on `(batch,
/// labels)` against central finite differences of the cross-entropy loss.
/// Runs in f64; large tensors are probed on a seeded subsample of
/// coordinates.
pub fn gradient_check(
    model: &Model<f64>,
    batch: &Tensor<f64>,
    labels: &[usize],
    tol: f64,
) -> Result<GradCheckReport> {
    let trace = model.forward(batch, Mode::Train)?;
    let grad_logits = sparse_ce_grad(trace.logits(), labels)?;
    let analytic = model.backward(&trace, &grad_logits)?;

    let mut probe = model.clone();
    let params = model.params().clone();
    check_against(&params, &analytic, tol, move |candidate| {
        probe.set_params(candidate.clone())?;
        let trace = probe.forward(batch, Mode::Eval)?;
        Ok(sparse_ce_loss(trace.logits(), labels)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{classifier_layers, LayerParams};
    use crate::tensor::shape;

    fn random_batch(rng: &mut Rng, dims: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
        let mut t = Tensor::zeros(dims).unwrap();
        for v in t.data_mut() {
            *v = rng.next_uniform(lo, hi).unwrap();
        }
        t
    }

    #[test]
    fn full_classifier_gradients_check_out() {
        let mut rng = Rng::seeded(31);
        let model: Model<f64> =
            Model::init(shape(&[8, 8, 2]), classifier_layers(3), &mut rng).unwrap();
        let batch = random_batch(&mut rng, &[2, 8, 8, 2], 0.0, 255.0);
        let report = gradient_check(&model, &batch, &[0, 2], 1e-5).unwrap();
        assert!(
            report.passed,
            "max rel err {} at {:?}",
            report.max_rel_err, report.worst
        );
        assert!(report.coords_checked > 0);
    }

    #[test]
    fn vacuous_pass_with_no_parameters() {
        let params: ParamSet<f64> = vec![None, None];
        let analytic: ParamSet<f64> = vec![None, None];
        let report = check_against(&params, &analytic, 1e-5, |_| Ok(0.0)).unwrap();
        assert!(report.passed);
        assert_eq!(report.coords_checked, 0);
        assert_eq!(report.max_rel_err, 0.0);
    }

    #[test]
    fn sign_flipped_gradient_fails_with_error_two() {
        // A corrupted backward pass that negates the true gradient has
        // relative error |g - (-g)| / |g| = 2 on every coordinate.
        let mut rng = Rng::seeded(8);
        let model: Model<f64> = Model::init(
            shape(&[6]),
            vec![crate::nn::LayerSpec::SoftmaxOutput { classes: 3 }],
            &mut rng,
        )
        .unwrap();
        let batch = random_batch(&mut rng, &[2, 6], -1.0, 1.0);
        let labels = [1usize, 0];

        let trace = model.forward(&batch, Mode::Train).unwrap();
        let grad_logits = sparse_ce_grad(trace.logits(), &labels).unwrap();
        let analytic = model.backward(&trace, &grad_logits).unwrap();
        let corrupted: ParamSet<f64> = analytic
            .iter()
            .map(|entry| {
                entry.as_ref().map(|lp| LayerParams {
                    weights: lp.weights.map(|v| -v),
                    bias: lp.bias.map(|v| -v),
                })
            })
            .collect();

        let mut probe = model.clone();
        let report = check_against(model.params(), &corrupted, 1e-5, move |candidate| {
            probe.set_params(candidate.clone()).unwrap();
            let trace = probe.forward(&batch, Mode::Eval).unwrap();
            sparse_ce_loss(trace.logits(), &labels)
        })
        .unwrap();
        assert!(!report.passed);
        assert!((report.max_rel_err - 2.0).abs() < 0.05, "{}", report.max_rel_err);
    }
}
