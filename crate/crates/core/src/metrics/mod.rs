//! Cluster-separation metrics between the harmful and harmless classes.

mod gaussian;
pub mod linalg;
mod scatter;
mod silhouette;

pub use gaussian::{bhattacharyya_distance, fit_gaussian, GaussianFit, MAX_RIDGE_ESCALATIONS};
pub use scatter::{scatter_decomposition, ScatterDecomposition};
pub use silhouette::{silhouette_samples, silhouette_score};

use nalgebra::DMatrix;

use crate::dataset::ClassLabel;
use crate::error::Result;

/// Rows of `points` belonging to `class`, in order.
pub fn class_rows(points: &DMatrix<f64>, labels: &[ClassLabel], class: ClassLabel) -> DMatrix<f64> {
    let idx: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == class)
        .map(|(i, _)| i)
        .collect();
    points.select_rows(idx.iter())
}

/// Fits one Gaussian per class: (harmless, harmful).
pub fn fit_class_gaussians(
    points: &DMatrix<f64>,
    labels: &[ClassLabel],
    ridge_floor: f64,
) -> Result<(GaussianFit, GaussianFit)> {
    let harmless = fit_gaussian(&class_rows(points, labels, ClassLabel::Harmless), ridge_floor)?;
    let harmful = fit_gaussian(&class_rows(points, labels, ClassLabel::Harmful), ridge_floor)?;
    Ok((harmless, harmful))
}
