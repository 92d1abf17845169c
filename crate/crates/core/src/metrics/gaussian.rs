//! Per-class Gaussian fits and the Bhattacharyya distance between them.

use nalgebra::{DMatrix, DVector};

use super::linalg::Cholesky;
use crate::error::{Error, Result};

/// Maximum number of ×10 ridge escalations before giving up.
pub const MAX_RIDGE_ESCALATIONS: u32 = 6;

/// Target smallest eigenvalue, relative to the mean variance tr(Σ)/k.
const MIN_EIGEN_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    /// Symmetric positive-definite after regularization.
    pub cov: DMatrix<f64>,
    pub ridge_used: f64,
    pub n: usize,
}

impl GaussianFit {
    /// Builds a fit from known parameters, checking symmetry and definiteness.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, n: usize) -> Result<Self> {
        let k = mean.len();
        if cov.shape() != (k, k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: cov.nrows(),
            });
        }
        if n < 2 {
            return Err(Error::Degenerate(format!("a Gaussian fit needs n >= 2, got {n}")));
        }
        if (&cov - cov.transpose()).abs().max() > 1e-12 {
            return Err(Error::Validation("covariance is not symmetric".into()));
        }
        Cholesky::factor(&cov)?;
        Ok(GaussianFit {
            mean,
            cov,
            ridge_used: 0.0,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Fits mean and ridge-regularized sample covariance to the rows of `points`.
///
/// The ridge starts at `ridge_floor · tr(Σ)/k` and grows tenfold until the
/// smallest eigenvalue of `Σ + εI` reaches `1e-12 · tr(Σ)/k`.
pub fn fit_gaussian(points: &DMatrix<f64>, ridge_floor: f64) -> Result<GaussianFit> {
    let (m, k) = points.shape();
    if m < 2 {
        return Err(Error::Degenerate(format!("a Gaussian fit needs at least 2 points, got {m}")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite point".into()));
    }
    let mean: DVector<f64> = points.row_mean().transpose();
    let mut cov = DMatrix::zeros(k, k);
    let mut dev = DVector::zeros(k);
    for row in points.row_iter() {
        for j in 0..k {
            dev[j] = row[j] - mean[j];
        }
        cov.ger(1.0, &dev, &dev, 1.0);
    }
    cov /= (m - 1) as f64;
    // exact symmetry
    for i in 0..k {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let scale = cov.trace() / k as f64;
    let target = MIN_EIGEN_RELATIVE * scale;
    let min_eig = cov.clone().symmetric_eigenvalues().min();
    let mut ridge = ridge_floor * scale;
    for escalation in 0..=MAX_RIDGE_ESCALATIONS {
        let regularized_min = min_eig + ridge;
        if regularized_min > 0.0 && regularized_min >= target {
            let mut reg = cov.clone();
            for i in 0..k {
                reg[(i, i)] += ridge;
            }
            if Cholesky::factor(&reg).is_ok() {
                return Ok(GaussianFit {
                    mean,
                    cov: reg,
                    ridge_used: ridge,
                    n: m,
                });
            }
        }
        if escalation < MAX_RIDGE_ESCALATIONS {
            ridge *= 10.0;
        }
    }
    Err(Error::Singular {
        escalations: MAX_RIDGE_ESCALATIONS,
        ridge,
    })
}

/// Bhattacharyya distance between two Gaussians:
/// `⅛ Δμᵀ Σ̄⁻¹ Δμ + ½ ln(det Σ̄ / √(det Σa det Σb))`, with `Σ̄ = (Σa + Σb)/2`.
///
/// Determinants enter only as Cholesky log-determinants.
pub fn bhattacharyya_distance(a: &GaussianFit, b: &GaussianFit) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let avg = (&a.cov + &b.cov) * 0.5;
    let chol_avg = Cholesky::factor(&avg)?;
    let chol_a = Cholesky::factor(&a.cov)?;
    let chol_b = Cholesky::factor(&b.cov)?;

    let diff = &a.mean - &b.mean;
    let mean_term = 0.125 * chol_avg.quad_form_inv(&diff);
    let cov_term = 0.5 * (chol_avg.log_det() - 0.5 * (chol_a.log_det() + chol_b.log_det()));
    Ok((mean_term + cov_term).max(0.0))
}
