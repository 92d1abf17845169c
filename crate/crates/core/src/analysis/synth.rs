use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{ClassLabel, DatasetMeta, EmbeddingDataset};
use crate::error::{Error, Result};

/// Two unit-variance isotropic Gaussian classes in `k` dimensions, the
/// harmful one shifted by `mean_gap` along axis 0. Harmless rows come first.
pub fn synth_dataset(
    n_per_class: usize,
    k: usize,
    mean_gap: f64,
    seed: u64,
    meta: DatasetMeta,
) -> Result<EmbeddingDataset> {
    if n_per_class < 2 || k < 2 {
        return Err(Error::Config(format!(
            "synthetic data needs n_per_class >= 2 and k >= 2 (got {n_per_class}, {k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut embeddings = Vec::with_capacity(2 * n_per_class * k);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (label, shift) in [(ClassLabel::Harmless, 0.0), (ClassLabel::Harmful, mean_gap)] {
        for _ in 0..n_per_class {
            for j in 0..k {
                let z: f64 = StandardNormal.sample(&mut rng);
                let v = if j == 0 { z + shift } else { z };
                embeddings.push(v as f32);
            }
            labels.push(label);
        }
    }
    EmbeddingDataset::new(k, embeddings, labels, meta)
}
