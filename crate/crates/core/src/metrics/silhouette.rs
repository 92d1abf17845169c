//! Two-class silhouette score with a blocked, row-parallel O(m²) kernel.
//!
//! Each row's distance sums are accumulated by a single worker in ascending
//! column order, and the final mean is a sequential sum over rows, so the
//! result does not depend on the number of threads.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

const ROW_BLOCK: usize = 64;
const COL_TILE: usize = 512;

/// Per-point silhouette values `s(i) = (b − a) / max(a, b)`.
pub fn silhouette_samples(points: &DMatrix<f64>, labels: &[ClassLabel]) -> Result<Vec<f64>> {
    let (m, k) = points.shape();
    if labels.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: labels.len(),
        });
    }
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::Degenerate(format!(
            "silhouette needs at least 2 points per class (harmless {}, harmful {})",
            counts[0], counts[1]
        )));
    }

    // Row-major copy so each distance reads two contiguous slices.
    let mut flat = Vec::with_capacity(m * k);
    for row in points.row_iter() {
        flat.extend(row.iter());
    }
    let class: Vec<usize> = labels.iter().map(|l| l.index()).collect();

    let mut out = vec![0.0; m];
    out.par_chunks_mut(ROW_BLOCK)
        .enumerate()
        .for_each(|(block, out_rows)| {
            let row0 = block * ROW_BLOCK;
            let rows = out_rows.len();
            let mut sums = vec![[0.0f64; 2]; rows];
            for tile in (0..m).step_by(COL_TILE) {
                let tile_end = (tile + COL_TILE).min(m);
                for (r, acc) in sums.iter_mut().enumerate() {
                    let xi = &flat[(row0 + r) * k..(row0 + r + 1) * k];
                    for j in tile..tile_end {
                        let xj = &flat[j * k..(j + 1) * k];
                        // the self term contributes an exact 0.0
                        acc[class[j]] += euclidean(xi, xj);
                    }
                }
            }
            for (r, acc) in sums.iter().enumerate() {
                let i = row0 + r;
                let own = class[i];
                let a = acc[own] / (counts[own] - 1) as f64;
                let b = acc[1 - own] / counts[1 - own] as f64;
                out_rows[r] = score(a, b);
            }
        });
    Ok(out)
}

/// Mean silhouette over all points, in [−1, 1].
pub fn silhouette_score(points: &DMatrix<f64>, labels: &[ClassLabel]) -> Result<f64> {
    let samples = silhouette_samples(points, labels)?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn score(a: f64, b: f64) -> f64 {
    let denom = a.max(b);
    if denom == 0.0 {
        0.0
    } else {
        (b - a) / denom
    }
}
