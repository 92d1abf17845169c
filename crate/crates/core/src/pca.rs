//! Principal component analysis via thin SVD of the centered data matrix.
//!
//! Eigenvalues are sample variances (n−1 denominator). Each component is
//! sign-normalized so its largest-magnitude entry is positive, with ties
//! going to the lowest index; this makes fits bit-reproducible.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// k rows of length d, orthonormal, by descending eigenvalue.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Sum of all feature variances of the training data.
    pub total_variance: f64,
}

pub fn fit_pca(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::Degenerate(format!("PCA needs at least 2 rows, got {n}")));
    }
    let max_k = (n - 1).min(d);
    if k == 0 || k > max_k {
        return Err(Error::ComponentRange { k, max: max_k });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("PCA input contains non-finite values".into()));
    }

    let mean: RowDVector<f64> = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let denom = (n - 1) as f64;
    let total_variance = centered.norm_squared() / denom;

    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    // Stable: equal singular values keep their decomposition order.
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut components = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut row: Vec<f64> = v_t.row(idx).iter().copied().collect();
        fix_sign(&mut row);
        components.push(row);
        let s = svd.singular_values[idx];
        eigenvalues.push(s * s / denom);
    }

    Ok(PcaModel {
        mean: mean.iter().copied().collect(),
        components,
        eigenvalues,
        total_variance,
    })
}

fn fix_sign(row: &mut [f64]) {
    let mut pivot = 0;
    for (i, v) in row.iter().enumerate() {
        if v.abs() > row[pivot].abs() {
            pivot = i;
        }
    }
    if row[pivot] < 0.0 {
        row.iter_mut().for_each(|v| *v = -*v);
    }
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    /// Projects rows of `x` onto the components: `components · (x_i − mean)`.
    pub fn project(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: x.ncols(),
            });
        }
        let mut out = DMatrix::zeros(x.nrows(), self.k());
        let mut centered = vec![0.0; self.d()];
        for i in 0..x.nrows() {
            for j in 0..self.d() {
                centered[j] = x[(i, j)] - self.mean[j];
            }
            for (c, comp) in self.components.iter().enumerate() {
                out[(i, c)] = comp.iter().zip(&centered).map(|(a, b)| a * b).sum();
            }
        }
        Ok(out)
    }

    /// Keeps only the leading `k` components.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.k() {
            return Err(Error::ComponentRange { k, max: self.k() });
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k].to_vec(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
            total_variance: self.total_variance,
        })
    }

    pub fn explained_variance_ratio(&self) -> Result<Vec<f64>> {
        explained_variance_ratio(&self.eigenvalues, self.total_variance)
    }

    pub fn components_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k(), self.d(), |i, j| self.components[i][j])
    }
}

pub fn project(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    model.project(x)
}

/// Fraction of total variance carried by each eigenvalue.
pub fn explained_variance_ratio(eigenvalues: &[f64], total_variance: f64) -> Result<Vec<f64>> {
    if total_variance.is_nan() || total_variance <= 0.0 {
        return Err(Error::Degenerate(
            "total variance is zero (all points identical)".into(),
        ));
    }
    Ok(eigenvalues
        .iter()
        .map(|e| (e / total_variance).clamp(0.0, 1.0))
        .collect())
}

/// Sample variance of each column, used by tests and reports.
pub fn column_variances(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows() as f64;
    let mean = x.row_mean();
    DVector::from_iterator(
        x.ncols(),
        x.column_iter()
            .zip(mean.iter())
            .map(|(c, m)| c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)),
    )
}
