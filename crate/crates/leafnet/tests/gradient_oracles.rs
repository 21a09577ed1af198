//! Finite-difference oracles for each layer in isolation.
//!
//! Each check builds the scalar objective `L = sum(c * f(inputs))` for a
//! fixed random weighting `c`, evaluates the layer's backward pass with
//! `grad_out = c`, and compares every coordinate against central
//! differences computed straight from the forward contract.

use leafnet::nn::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward,
    maxpool_forward,
};
use leafnet::{Rng, Tensor};

const TOL: f64 = 1e-5;

fn random_tensor(rng: &mut Rng, dims: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let mut t = Tensor::zeros(dims).unwrap();
    for v in t.data_mut() {
        *v = rng.next_uniform(lo, hi).unwrap();
    }
    t
}

fn weighted_sum(out: &Tensor<f64>, c: &Tensor<f64>) -> f64 {
    out.data().iter().zip(c.data()).map(|(a, b)| a * b).sum()
}

fn assert_close(analytic: f64, numeric: f64, what: &str, coord: usize) {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-10 {
        return;
    }
    let err = (analytic - numeric).abs() / denom;
    assert!(
        err <= TOL,
        "{what}[{coord}]: analytic {analytic} vs numeric {numeric} (rel err {err})"
    );
}

/// Central difference of `f` in the given coordinate of `t`.
fn central_diff(t: &Tensor<f64>, coord: usize, mut f: impl FnMut(&Tensor<f64>) -> f64) -> f64 {
    let h = 1e-5 * t.data()[coord].abs().max(1.0);
    let mut plus = t.clone();
    plus.data_mut()[coord] += h;
    let mut minus = t.clone();
    minus.data_mut()[coord] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

#[test]
fn conv2d_gradients_match_finite_differences() {
    let mut rng = Rng::seeded(101);
    let x = random_tensor(&mut rng, &[2, 5, 5, 2], -1.0, 1.0);
    let w = random_tensor(&mut rng, &[3, 3, 2, 3], -1.0, 1.0);
    let b = random_tensor(&mut rng, &[3], -0.5, 0.5);
    let c = random_tensor(&mut rng, &[2, 5, 5, 3], -1.0, 1.0);

    let (gi, gw, gb) = conv2d_backward(&x, &w, &c).unwrap();

    for coord in 0..x.len() {
        let numeric = central_diff(&x, coord, |xx| {
            weighted_sum(&conv2d_forward(xx, &w, &b).unwrap(), &c)
        });
        assert_close(gi.data()[coord], numeric, "grad_input", coord);
    }
    for coord in 0..w.len() {
        let numeric = central_diff(&w, coord, |ww| {
            weighted_sum(&conv2d_forward(&x, ww, &b).unwrap(), &c)
        });
        assert_close(gw.data()[coord], numeric, "grad_weights", coord);
    }
    for coord in 0..b.len() {
        let numeric = central_diff(&b, coord, |bb| {
            weighted_sum(&conv2d_forward(&x, &w, bb).unwrap(), &c)
        });
        assert_close(gb.data()[coord], numeric, "grad_bias", coord);
    }
}

#[test]
fn dense_gradients_match_finite_differences() {
    let mut rng = Rng::seeded(102);
    let x = random_tensor(&mut rng, &[3, 4], -1.0, 1.0);
    let w = random_tensor(&mut rng, &[4, 5], -1.0, 1.0);
    let b = random_tensor(&mut rng, &[5], -0.5, 0.5);
    let c = random_tensor(&mut rng, &[3, 5], -1.0, 1.0);

    let (gi, gw, gb) = dense_backward(&x, &w, &c).unwrap();

    for coord in 0..x.len() {
        let numeric = central_diff(&x, coord, |xx| {
            weighted_sum(&dense_forward(xx, &w, &b).unwrap(), &c)
        });
        assert_close(gi.data()[coord], numeric, "grad_input", coord);
    }
    for coord in 0..w.len() {
        let numeric = central_diff(&w, coord, |ww| {
            weighted_sum(&dense_forward(&x, ww, &b).unwrap(), &c)
        });
        assert_close(gw.data()[coord], numeric, "grad_weights", coord);
    }
    for coord in 0..b.len() {
        let numeric = central_diff(&b, coord, |bb| {
            weighted_sum(&dense_forward(&x, &w, bb).unwrap(), &c)
        });
        assert_close(gb.data()[coord], numeric, "grad_bias", coord);
    }
}

#[test]
fn maxpool_gradient_matches_finite_differences() {
    // Snap inputs to a coarse grid so the 1e-5-scale probes can never flip
    // an argmax, then nudge ties apart.
    let mut rng = Rng::seeded(103);
    let mut x = Tensor::<f64>::zeros(&[1, 6, 6, 2]).unwrap();
    for (i, v) in x.data_mut().iter_mut().enumerate() {
        let coarse: f64 = rng.next_uniform(-1.0f64, 1.0).unwrap();
        *v = (coarse * 50.0).round() / 50.0 + (i % 7) as f64 * 1e-3;
    }
    let c = random_tensor(&mut rng, &[1, 3, 3, 2], -1.0, 1.0);

    let (_, mask) = maxpool_forward(&x).unwrap();
    let gi = maxpool_backward(&mask, &c).unwrap();

    for coord in 0..x.len() {
        let numeric = central_diff(&x, coord, |xx| {
            let (out, _) = maxpool_forward(xx).unwrap();
            weighted_sum(&out, &c)
        });
        assert_close(gi.data()[coord], numeric, "grad_input", coord);
    }
}
