use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

/// Traces of the within-, between- and total-scatter matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterDecomposition {
    pub trace_within: f64,
    pub trace_between: f64,
    pub trace_total: f64,
    /// tr(S_B) / tr(S_T); 0 when every point coincides.
    pub bcv_ratio: f64,
}

pub fn scatter_decomposition(points: &DMatrix<f64>, labels: &[ClassLabel]) -> Result<ScatterDecomposition> {
    let (m, k) = points.shape();
    if labels.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: labels.len(),
        });
    }
    let mut counts = [0usize; 2];
    let mut sums = [vec![0.0; k], vec![0.0; k]];
    for (row, l) in points.row_iter().zip(labels) {
        let c = l.index();
        counts[c] += 1;
        for j in 0..k {
            sums[c][j] += row[j];
        }
    }
    if counts.contains(&0) {
        return Err(Error::Degenerate("scatter decomposition needs both classes".into()));
    }
    let class_means: Vec<Vec<f64>> = (0..2)
        .map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect())
        .collect();
    let grand: Vec<f64> = (0..k).map(|j| (sums[0][j] + sums[1][j]) / m as f64).collect();

    let trace_between: f64 = (0..2)
        .map(|c| {
            counts[c] as f64
                * class_means[c]
                    .iter()
                    .zip(&grand)
                    .map(|(a, g)| (a - g) * (a - g))
                    .sum::<f64>()
        })
        .sum();
    let trace_within: f64 = points
        .row_iter()
        .zip(labels)
        .map(|(row, l)| {
            let mu = &class_means[l.index()];
            row.iter().zip(mu).map(|(x, u)| (x - u) * (x - u)).sum::<f64>()
        })
        .sum();
    let trace_total = trace_within + trace_between;
    let bcv_ratio = if trace_total > 0.0 {
        (trace_between / trace_total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(ScatterDecomposition {
        trace_within,
        trace_between,
        trace_total,
        bcv_ratio,
    })
}
