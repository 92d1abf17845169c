use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.ncols(),
            });
        }
        let mut l = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for p in 0..j {
                diag -= l[(j, p)] * l[(j, p)];
            }
            if diag.is_nan() || diag <= 0.0 || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    /// ln det A = 2 Σ ln L_ii
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solves L y = b by forward substitution.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.l.nrows();
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let mut s = b[i];
            for p in 0..i {
                s -= self.l[(i, p)] * y[p];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// bᵀ A⁻¹ b, evaluated as ‖L⁻¹ b‖².
    pub fn quad_form_inv(&self, b: &DVector<f64>) -> f64 {
        self.solve_lower(b).norm_squared()
    }
}
