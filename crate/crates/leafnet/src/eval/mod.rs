//! Evaluation analytics: confusion matrix, penultimate-feature extraction,
//! embedding cluster statistics, and metrics export.

pub mod export;
pub mod tsne;

pub use export::{
    export_metrics, parse_metrics_csv, write_confusion_csv, write_embeddings_csv,
    write_metrics_csv,
};
pub use tsne::{
    conditional_affinities, perplexity_affinities, tsne_embed, EmbeddingProjection, TsneConfig,
};

use crate::data::{batch_to_tensor, make_batches, BatchOrder, LabeledFile};
use crate::error::{Error, Result};
use crate::nn::{Mode, Model};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// K x K grid of (true class, predicted class) counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
    class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Count of samples with true class `t` predicted as `p`.
    pub fn at(&self, t: usize, p: usize) -> u64 {
        self.counts[t * self.k + p]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k {
            return Err(Error::argument(format!(
                "{} class names for a {k}x{k} matrix",
                names.len(),
                k = self.k
            )));
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.at(i, i)).sum()
    }

    /// `trace / total`.
    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }
}

/// Builds the confusion matrix; entry `(t, p)` counts samples with true
/// class `t` and predicted class `p`. Class names default to `class_<i>`.
pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
    k: usize,
) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(Error::argument(format!(
            "need equal non-empty prediction/label lists, got {} and {}",
            predictions.len(),
            labels.len()
        )));
    }
    let mut counts = vec![0u64; k * k];
    for (&p, &t) in predictions.iter().zip(labels) {
        if p >= k || t >= k {
            return Err(Error::argument(format!(
                "class out of range [0,{k}): prediction {p}, label {t}"
            )));
        }
        counts[t * k + p] += 1;
    }
    Ok(ConfusionMatrix {
        k,
        counts,
        class_names: (0..k).map(|i| format!("class_{i}")).collect(),
    })
}

/// Runs `model` over `files` in eval mode and fixed order, collecting the
/// argmax prediction per sample, the true labels, and the mean loss.
pub fn predict_dataset<T: Scalar>(
    model: &Model<T>,
    files: &[LabeledFile],
    image_size: usize,
    batch_size: usize,
) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    if files.is_empty() {
        return Err(Error::argument("cannot evaluate an empty dataset"));
    }
    let mut predictions = Vec::with_capacity(files.len());
    let mut labels = Vec::with_capacity(files.len());
    let mut loss_sum = 0.0;
    for batch in make_batches(files, BatchOrder::Sequential, batch_size, image_size)? {
        let batch = batch?;
        let tensor: Tensor<T> = batch_to_tensor(&batch.images)?;
        let trace = model.forward(&tensor, Mode::Eval)?;
        let loss = crate::train::sparse_ce_loss(trace.logits(), &batch.labels)?.as_f64();
        loss_sum += loss * batch.labels.len() as f64;
        let k = model.classes();
        for row in trace.probabilities().data().chunks_exact(k) {
            predictions.push(crate::train::argmax(row));
        }
        labels.extend(batch.labels);
    }
    Ok((predictions, labels, loss_sum / files.len() as f64))
}

/// Runs `model` over `files` in eval mode and deterministic order, returning
/// one penultimate-activation row per sample plus the labels.
pub fn extract_features<T: Scalar>(
    model: &Model<T>,
    files: &[LabeledFile],
    image_size: usize,
    batch_size: usize,
) -> Result<(Tensor<T>, Vec<usize>)> {
    if files.is_empty() {
        return Err(Error::argument("cannot extract features from an empty dataset"));
    }
    let width = model.feature_width();
    let mut rows = Vec::with_capacity(files.len() * width);
    let mut labels = Vec::with_capacity(files.len());
    for batch in make_batches(files, BatchOrder::Sequential, batch_size, image_size)? {
        let batch = batch?;
        let tensor: Tensor<T> = batch_to_tensor(&batch.images)?;
        let trace = model.forward(&tensor, Mode::Eval)?;
        rows.extend_from_slice(trace.penultimate().data());
        labels.extend(batch.labels);
    }
    Ok((Tensor::from_vec(&[files.len(), width], rows)?, labels))
}

/// Per-class intra-cluster diameters and the K x K inter-centroid distance
/// grid of a labeled point set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub diameters: Vec<f64>,
    pub centroid_distances: Vec<f64>, // K x K row-major
    pub k: usize,
}

impl ClusterStats {
    pub fn centroid_distance(&self, a: usize, b: usize) -> f64 {
        self.centroid_distances[a * self.k + b]
    }
}

fn point_distance<T: Scalar>(points: &Tensor<T>, d: usize, i: usize, j: usize) -> f64 {
    let pi = &points.data()[i * d..(i + 1) * d];
    let pj = &points.data()[j * d..(j + 1) * d];
    pi.iter()
        .zip(pj)
        .map(|(&a, &b)| {
            let diff = a.as_f64() - b.as_f64();
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}

/// Max pairwise distance within each class and distances between class
/// centroids. Every class in `[0, max_label]` must have at least one point.
pub fn cluster_stats<T: Scalar>(points: &Tensor<T>, labels: &[usize]) -> Result<ClusterStats> {
    let [n, d] = *points.dims() else {
        return Err(Error::shape("points must be rank 2"));
    };
    if labels.len() != n || n == 0 {
        return Err(Error::argument("labels must match a non-empty point set"));
    }
    let k = labels.iter().max().unwrap() + 1;
    let mut class_counts = vec![0usize; k];
    for &l in labels {
        class_counts[l] += 1;
    }
    if let Some(empty) = class_counts.iter().position(|&c| c == 0) {
        return Err(Error::argument(format!("class {empty} has no points")));
    }

    let mut diameters = vec![0.0f64; k];
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                let dist = point_distance(points, d, i, j);
                if dist > diameters[labels[i]] {
                    diameters[labels[i]] = dist;
                }
            }
        }
    }

    let mut centroids = vec![0.0f64; k * d];
    for (i, &l) in labels.iter().enumerate() {
        for c in 0..d {
            centroids[l * d + c] += points.data()[i * d + c].as_f64();
        }
    }
    for l in 0..k {
        for c in 0..d {
            centroids[l * d + c] /= class_counts[l] as f64;
        }
    }
    let mut centroid_distances = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            let dist: f64 = (0..d)
                .map(|c| {
                    let diff = centroids[a * d + c] - centroids[b * d + c];
                    diff * diff
                })
                .sum::<f64>()
                .sqrt();
            centroid_distances[a * k + b] = dist;
        }
    }
    Ok(ClusterStats {
        diameters,
        centroid_distances,
        k,
    })
}

/// Mean silhouette score: per point `(b - a) / max(a, b)` with `a` the mean
/// intra-cluster distance and `b` the mean distance to the nearest other
/// cluster. Singleton clusters score 0.
pub fn silhouette_score<T: Scalar>(points: &Tensor<T>, labels: &[usize]) -> Result<f64> {
    let [n, d] = *points.dims() else {
        return Err(Error::shape("points must be rank 2"));
    };
    if labels.len() != n || n < 2 {
        return Err(Error::argument("need at least 2 labeled points"));
    }
    let k = labels.iter().max().unwrap() + 1;
    if k < 2 {
        return Err(Error::argument("silhouette needs at least 2 clusters"));
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }

    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0f64; k];
        for j in 0..n {
            if i != j {
                sums[labels[j]] += point_distance(points, d, i, j);
            }
        }
        let own = labels[i];
        if counts[own] <= 1 {
            continue; // silhouette of a singleton is 0
        }
        let a = sums[own] / (counts[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    Ok(total / n as f64)
}
