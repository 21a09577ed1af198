//! t-SNE behavior on synthetic well-separated Gaussian clusters.

use leafnet::eval::{
    conditional_affinities, perplexity_affinities, silhouette_score, tsne_embed, TsneConfig,
};
use leafnet::{Rng, Tensor};

/// 3 clusters of `per_cluster` points in 10 dimensions, unit variance,
/// means pairwise 10 apart.
fn three_gaussians(per_cluster: usize, seed: u64) -> (Tensor<f64>, Vec<usize>) {
    let d = 10;
    let mut means = vec![vec![0.0; d]; 3];
    means[1][0] = 10.0;
    // Equilateral: distance 10 from both other means.
    means[2][0] = 5.0;
    means[2][1] = 75.0f64.sqrt();

    let mut rng = Rng::seeded(seed);
    let n = per_cluster * 3;
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for cluster in 0..3 {
        for _ in 0..per_cluster {
            for dim in 0..d {
                // One gaussian per dimension; the second draw is discarded
                // to keep the construction simple.
                let (g, _) = rng.next_gaussian_pair();
                data.push(means[cluster][dim] + g);
            }
            labels.push(cluster);
        }
    }
    (Tensor::from_vec(&[n, d], data).unwrap(), labels)
}

#[test]
fn clusters_stay_separated_in_the_plane() {
    let (x, labels) = three_gaussians(20, 5);
    let config = TsneConfig {
        seed: 11,
        ..TsneConfig::default()
    };
    let perplexity = config.effective_perplexity(60);
    let p = perplexity_affinities(&x, perplexity).unwrap();
    let projection = tsne_embed(&p, &labels, &config).unwrap();

    let s = silhouette_score(&projection.points, &labels).unwrap();
    assert!(s >= 0.5, "silhouette {s}");

    // KL improves after the exaggeration phase ends at iteration 250
    // (trace entry 4) and never goes negative.
    let trace = &projection.kl_trace;
    assert_eq!(trace.len(), 20);
    let at_250 = trace[4];
    let final_kl = *trace.last().unwrap();
    assert!(final_kl < at_250, "final {final_kl} vs iter-250 {at_250}");
    assert!(trace.iter().all(|&kl| kl >= 0.0));
}

#[test]
fn conditional_rows_hit_requested_perplexity() {
    let (x, _) = three_gaussians(20, 6);
    let target = 15.0;
    let cond = conditional_affinities(&x, target).unwrap();
    let n = cond.dims()[0];
    for i in 0..n {
        let row = &cond.data()[i * n..(i + 1) * n];
        let entropy: f64 = -row
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.log2())
            .sum::<f64>();
        let achieved = entropy.exp2();
        assert!(
            (achieved - target).abs() <= 1e-3,
            "row {i}: perplexity {achieved}"
        );
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(row[i], 0.0);
    }
}

#[test]
fn embedding_is_bitwise_reproducible() {
    let (x, labels) = three_gaussians(10, 7);
    let p = perplexity_affinities(&x, 5.0).unwrap();
    let config = TsneConfig {
        perplexity: 5.0,
        iterations: 500,
        seed: 3,
        ..TsneConfig::default()
    };
    let a = tsne_embed(&p, &labels, &config).unwrap();
    let b = tsne_embed(&p, &labels, &config).unwrap();
    assert_eq!(a.points.data(), b.points.data());
    assert_eq!(a.kl_trace, b.kl_trace);
}
