//! Exact (O(n^2)) t-SNE: perplexity-calibrated Gaussian affinities in the
//! input space, Student-t affinities in the plane, gradient descent on the
//! KL divergence with early exaggeration and a momentum schedule.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Iterations that run with the exaggerated P matrix.
const EXAGGERATION_PHASE: usize = 250;
/// Iteration at which momentum switches from 0.5 to 0.8.
const MOMENTUM_SWITCH: usize = 250;
const MOMENTUM_EARLY: f64 = 0.5;
const MOMENTUM_LATE: f64 = 0.8;
/// KL divergence is recorded every this many iterations.
pub const KL_SAMPLE_EVERY: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            seed: 0,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.perplexity < 2.0 {
            return Err(Error::argument("perplexity must be >= 2"));
        }
        if self.iterations < 250 {
            return Err(Error::argument("iterations must be >= 250"));
        }
        Ok(())
    }

    /// Perplexity silently capped at `(n - 1) / 3` for a dataset of `n`
    /// points.
    pub fn effective_perplexity(&self, n: usize) -> f64 {
        self.perplexity.min((n as f64 - 1.0) / 3.0)
    }
}

/// 2-d embedding plus the KL divergence sampled every
/// [`KL_SAMPLE_EVERY`] iterations (entry `i` belongs to iteration
/// `(i + 1) * KL_SAMPLE_EVERY`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingProjection<T> {
    pub points: Tensor<T>,
    pub labels: Vec<usize>,
    pub kl_trace: Vec<f64>,
}

fn squared_distances<T: Scalar>(x: &Tensor<T>, n: usize, d: usize) -> Vec<f64> {
    let data = x.data();
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        let xi = &data[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let xj = &data[j * d..(j + 1) * d];
            let dist: f64 = xi
                .iter()
                .zip(xj)
                .map(|(&a, &b)| {
                    let diff = a.as_f64() - b.as_f64();
                    diff * diff
                })
                .sum();
            out[i * n + j] = dist;
            out[j * n + i] = dist;
        }
    }
    out
}

/// Conditional distribution for row `i` at precision `beta`, returning its
/// Shannon entropy in bits. `row` is filled with p_{j|i} (zero diagonal).
fn row_distribution(dist: &[f64], i: usize, n: usize, beta: f64, row: &mut [f64]) -> f64 {
    // Shift by the row minimum off-diagonal distance; the distribution is
    // invariant and the exponentials stay in range for any beta.
    let mut min_d = f64::INFINITY;
    for j in 0..n {
        if j != i && dist[i * n + j] < min_d {
            min_d = dist[i * n + j];
        }
    }
    let mut sum = 0.0;
    for j in 0..n {
        row[j] = if j == i {
            0.0
        } else {
            (-beta * (dist[i * n + j] - min_d)).exp()
        };
        sum += row[j];
    }
    let mut entropy_bits = 0.0;
    for v in row.iter_mut() {
        *v /= sum;
        if *v > 0.0 {
            entropy_bits -= *v * v.log2();
        }
    }
    entropy_bits
}

/// Conditional affinity matrix: row `i` holds `p_{j|i}` (zero diagonal),
/// with each row's Gaussian bandwidth found by binary search so the row
/// perplexity (2^entropy) matches the target. Rows sum to 1.
pub fn conditional_affinities<T: Scalar>(x: &Tensor<T>, perplexity: f64) -> Result<Tensor<T>> {
    let [n, d] = *x.dims() else {
        return Err(Error::shape("affinity input must be rank 2 (n, d)"));
    };
    if n < 3 {
        return Err(Error::argument("need at least 3 points"));
    }
    if perplexity < 2.0 {
        return Err(Error::argument("perplexity must be >= 2"));
    }
    if perplexity > (n as f64 - 1.0) / 3.0 {
        return Err(Error::argument(format!(
            "perplexity {perplexity} too large for {n} points (max {})",
            (n as f64 - 1.0) / 3.0
        )));
    }
    let dist = squared_distances(x, n, d);
    for i in 0..n {
        let degenerate = (0..n).all(|j| j == i || dist[i * n + j] == 0.0);
        if degenerate {
            return Err(Error::Numeric(format!(
                "point {i} coincides with every other point; affinities are undefined"
            )));
        }
    }

    let target_bits = perplexity.log2();
    let mut cond = vec![T::zero(); n * n];
    let mut row = vec![0.0f64; n];
    for i in 0..n {
        let mut beta = 1.0f64;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        let mut entropy = row_distribution(&dist, i, n, beta, &mut row);
        for _ in 0..64 {
            if (entropy - target_bits).abs() <= 1e-4 {
                break;
            }
            if entropy > target_bits {
                // Distribution too flat: sharpen.
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_finite() {
                    (beta + beta_min) / 2.0
                } else {
                    beta / 2.0
                };
            }
            entropy = row_distribution(&dist, i, n, beta, &mut row);
        }
        for (slot, &v) in cond[i * n..(i + 1) * n].iter_mut().zip(&row) {
            *slot = T::from_f64(v);
        }
    }
    Tensor::from_vec(&[n, n], cond)
}

/// Symmetrized affinity matrix `P = (P_cond + P_cond^T) / 2n` built from
/// [`conditional_affinities`]; `sum(P) = 1`.
pub fn perplexity_affinities<T: Scalar>(x: &Tensor<T>, perplexity: f64) -> Result<Tensor<T>> {
    let cond = conditional_affinities(x, perplexity)?;
    let n = cond.dims()[0];
    let c = cond.data();
    let scale = T::from_f64(1.0 / (2.0 * n as f64));
    let mut p = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (c[i * n + j] + c[j * n + i]) * scale;
        }
    }
    Tensor::from_vec(&[n, n], p)
}

fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut kl = 0.0;
    for (&pv, &qv) in p.iter().zip(q) {
        if pv > 0.0 {
            kl += pv * (pv.max(1e-12) / qv.max(1e-12)).ln();
        }
    }
    kl
}

/// Gradient descent on `KL(P || Q)` with Student-t low-dimensional
/// affinities. Deterministic for a fixed seed.
pub fn tsne_embed<T: Scalar>(
    p: &Tensor<T>,
    labels: &[usize],
    config: &TsneConfig,
) -> Result<EmbeddingProjection<T>> {
    config.validate()?;
    let [n, cols] = *p.dims() else {
        return Err(Error::shape("affinity matrix must be rank 2"));
    };
    if n != cols {
        return Err(Error::shape("affinity matrix must be square"));
    }
    if !labels.is_empty() && labels.len() != n {
        return Err(Error::argument("labels must be empty or match the point count"));
    }
    let p: Vec<f64> = p.data().iter().map(|v| v.as_f64()).collect();

    // Gaussian init with standard deviation 1e-4.
    let mut rng = Rng::seeded(config.seed);
    let mut y = vec![0.0f64; n * 2];
    for pair in y.chunks_exact_mut(2) {
        let (a, b) = rng.next_gaussian_pair();
        pair[0] = a * 1e-4;
        pair[1] = b * 1e-4;
    }

    let mut velocity = vec![0.0f64; n * 2];
    let mut num = vec![0.0f64; n * n]; // (1 + ||yi-yj||^2)^-1
    let mut q = vec![0.0f64; n * n];
    let mut grad = vec![0.0f64; n * 2];
    let mut kl_trace = Vec::new();

    for iter in 1..=config.iterations {
        // Student-t kernel and its normalization.
        let mut num_sum = 0.0;
        for i in 0..n {
            num[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let dy0 = y[i * 2] - y[j * 2];
                let dy1 = y[i * 2 + 1] - y[j * 2 + 1];
                let v = 1.0 / (1.0 + dy0 * dy0 + dy1 * dy1);
                num[i * n + j] = v;
                num[j * n + i] = v;
                num_sum += 2.0 * v;
            }
        }
        let inv_sum = 1.0 / num_sum;
        for (qv, &nv) in q.iter_mut().zip(&num) {
            *qv = nv * inv_sum;
        }

        let exaggeration = if iter <= EXAGGERATION_PHASE {
            config.early_exaggeration
        } else {
            1.0
        };
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        for i in 0..n {
            let mut g0 = 0.0;
            let mut g1 = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let coeff = (exaggeration * p[i * n + j] - q[i * n + j]) * num[i * n + j];
                g0 += coeff * (y[i * 2] - y[j * 2]);
                g1 += coeff * (y[i * 2 + 1] - y[j * 2 + 1]);
            }
            grad[i * 2] = 4.0 * g0;
            grad[i * 2 + 1] = 4.0 * g1;
        }

        let momentum = if iter <= MOMENTUM_SWITCH {
            MOMENTUM_EARLY
        } else {
            MOMENTUM_LATE
        };
        for ((yv, vv), &gv) in y.iter_mut().zip(&mut velocity).zip(&grad) {
            *vv = momentum * *vv - config.learning_rate * gv;
            *yv += *vv;
            if !yv.is_finite() {
                return Err(Error::Numeric(format!(
                    "embedding diverged at iteration {iter}"
                )));
            }
        }

        // KL against the true (un-exaggerated) P, sampled every stride and
        // at the final iteration.
        if iter % KL_SAMPLE_EVERY == 0 || iter == config.iterations {
            kl_trace.push(kl_divergence(&p, &q));
        }
    }

    let points = Tensor::from_vec(&[n, 2], y.iter().map(|&v| T::from_f64(v)).collect())?;
    Ok(EmbeddingProjection {
        points,
        labels: labels.to_vec(),
        kl_trace,
    })
}
