//! Reference implementations used as oracles. None of these share code paths
//! with the library routines they check.
#![allow(dead_code)]

use alignprobe::dataset::{ClassLabel, DatasetMeta, Pooling, Stage};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn meta(model: &str, stage: Stage) -> DatasetMeta {
    DatasetMeta {
        model_id: model.into(),
        language: "en".into(),
        stage,
        layer: -1,
        pooling: Pooling::LastToken,
        corpus_id: "synthetic".into(),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random data with an anisotropic spectrum, so eigenvalues are well separated.
pub fn anisotropic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut x = gaussian_matrix(rng, rows, cols);
    for (j, mut c) in x.column_iter_mut().enumerate() {
        c *= 1.0 + 1.7 * (cols - j) as f64;
    }
    x
}

pub fn random_labels(rng: &mut ChaCha8Rng, m: usize) -> Vec<ClassLabel> {
    let mut l: Vec<ClassLabel> = (0..m)
        .map(|_| if rng.random_bool(0.5) { ClassLabel::Harmful } else { ClassLabel::Harmless })
        .collect();
    // guarantee two members per class
    l[0] = ClassLabel::Harmless;
    l[1] = ClassLabel::Harmless;
    l[2] = ClassLabel::Harmful;
    l[3] = ClassLabel::Harmful;
    l
}

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, d, d);
    let mut q = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut v = g.column(j).into_owned();
        for p in 0..j {
            let proj = q.column(p).dot(&v);
            v -= q.column(p) * proj;
        }
        let norm = v.norm();
        q.set_column(j, &(v / norm));
    }
    q
}

/// Sample covariance by the textbook double loop.
pub fn sample_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = x.shape();
    let means: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64).collect();
    DMatrix::from_fn(d, d, |a, b| {
        (0..n).map(|i| (x[(i, a)] - means[a]) * (x[(i, b)] - means[b])).sum::<f64>() / (n - 1) as f64
    })
}

/// Cyclic Jacobi eigenvalue iteration for a small symmetric matrix,
/// returned in descending order.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * m[(i, j)]).sum();
        if off < 1e-30 * m.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut j = DMatrix::<f64>::identity(n, n);
                j[(p, p)] = c;
                j[(q, q)] = c;
                j[(p, q)] = s;
                j[(q, p)] = -s;
                m = j.transpose() * &m * &j;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// O(m²) silhouette over every ordered pair.
pub fn brute_force_silhouette(points: &DMatrix<f64>, labels: &[ClassLabel]) -> f64 {
    let m = points.nrows();
    let mut total = 0.0;
    for i in 0..m {
        let (mut own, mut own_n, mut other, mut other_n) = (0.0, 0usize, 0.0, 0usize);
        for j in 0..m {
            if i == j {
                continue;
            }
            let d = (points.row(i) - points.row(j)).norm();
            if labels[i] == labels[j] {
                own += d;
                own_n += 1;
            } else {
                other += d;
                other_n += 1;
            }
        }
        let a = own / own_n as f64;
        let b = other / other_n as f64;
        total += if a.max(b) == 0.0 { 0.0 } else { (b - a) / a.max(b) };
    }
    total / m as f64
}

/// tr(S_T) from deviations about the grand mean.
pub fn direct_total_scatter(points: &DMatrix<f64>) -> f64 {
    let mean = points.row_mean();
    points.row_iter().map(|r| (r - &mean).norm_squared()).sum()
}
