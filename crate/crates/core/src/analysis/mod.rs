//! The analysis pipeline: PCA projection, separation metrics, and
//! before/after comparison of reports.

mod batch;
mod compare;
mod synth;

pub use batch::{
    batch_analyze, comparison_table, BatchFailure, BatchOutcome, ComparisonRow, ComparisonTable,
    read_report_dir, read_reports, Manifest, ManifestEntry, MetricTriple,
};
pub use compare::{compare, ComparisonReport, LOG10_BD_MAX, LOG10_BD_MIN, RATIO_BD_MIN_REFERENCE};
pub use synth::synth_dataset;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{BalanceSummary, ClassLabel, DatasetMeta, EmbeddingDataset};
use crate::error::{Error, Result};
use crate::metrics::{bhattacharyya_distance, fit_class_gaussians, scatter_decomposition, silhouette_score};
use crate::pca::{fit_pca, PcaModel};

pub const MAX_COMPONENTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SilhouetteSpace {
    /// The k_metrics PCA projection.
    Pca,
    /// The (optionally normalized) embeddings themselves.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k_visual: usize,
    pub k_metrics: usize,
    pub ridge_floor: f64,
    pub normalize_embeddings: bool,
    pub joint_fit: bool,
    pub silhouette_space: SilhouetteSpace,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            k_visual: 2,
            k_metrics: 10,
            ridge_floor: 1e-6,
            normalize_embeddings: false,
            joint_fit: false,
            silhouette_space: SilhouetteSpace::Pca,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.k_visual && self.k_visual <= self.k_metrics && self.k_metrics <= MAX_COMPONENTS) {
            return Err(Error::Config(format!(
                "need 2 <= k_visual ({}) <= k_metrics ({}) <= {MAX_COMPONENTS}",
                self.k_visual, self.k_metrics
            )));
        }
        if !(self.ridge_floor >= 0.0 && self.ridge_floor.is_finite()) {
            return Err(Error::Config(format!("ridge_floor must be finite and >= 0, got {}", self.ridge_floor)));
        }
        Ok(())
    }

    fn check_shape(&self, n: usize, d: usize) -> Result<()> {
        let max = (n.saturating_sub(1)).min(d);
        if self.k_metrics > max {
            return Err(Error::Config(format!(
                "k_metrics {} exceeds min(n-1, d) = {max} for a {n}x{d} dataset",
                self.k_metrics
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaFit {
    /// One PCA per dataset.
    PerDataset,
    /// One PCA over the union of several datasets.
    Joint,
}

/// Every separation metric for one (model, language, stage) dataset.
///
/// Fields that only a computed analysis can supply are optional so that
/// externally published metric rows can be loaded as reports too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub meta: DatasetMeta,
    pub balance: BalanceSummary,
    pub pca_fit: PcaFit,
    /// Per-component explained variance ratio up to k_metrics.
    #[serde(default)]
    pub explained_variance_ratio: Vec<f64>,
    pub evr_visual: Option<f64>,
    pub evr_metrics: Option<f64>,
    pub bd: f64,
    pub ss: f64,
    pub bcv_metrics: f64,
    pub bcv_visual: Option<f64>,
    pub trace_within_metrics: Option<f64>,
    pub trace_between_metrics: Option<f64>,
    pub ridge_used_harmful: Option<f64>,
    pub ridge_used_harmless: Option<f64>,
    pub config: AnalysisConfig,
    /// n × k_visual projection, retained for plotting.
    #[serde(default)]
    pub projected_visual: Vec<Vec<f64>>,
    /// 0 harmless, 1 harmful; parallel to `projected_visual`.
    #[serde(default)]
    pub labels: Vec<u8>,
}

impl SeparationReport {
    pub fn class_labels(&self) -> Result<Vec<ClassLabel>> {
        self.labels
            .iter()
            .map(|&b| ClassLabel::from_byte(b).ok_or_else(|| Error::Validation(format!("bad label {b} in report"))))
            .collect()
    }

    /// Checks the numeric ranges every report must respect.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} = {v} outside [0, 1]")))
            }
        };
        if self.bd.is_nan() || self.bd < 0.0 {
            return Err(Error::Validation(format!("bd = {} is negative", self.bd)));
        }
        if !(-1.0..=1.0).contains(&self.ss) {
            return Err(Error::Validation(format!("ss = {} outside [-1, 1]", self.ss)));
        }
        unit("bcv_metrics", self.bcv_metrics)?;
        for (name, v) in [
            ("bcv_visual", self.bcv_visual),
            ("evr_visual", self.evr_visual),
            ("evr_metrics", self.evr_metrics),
        ] {
            if let Some(v) = v {
                unit(name, v)?;
            }
        }
        if self.projected_visual.len() != self.labels.len() {
            return Err(Error::Validation("projected_visual and labels differ in length".into()));
        }
        self.meta.validate()
    }
}

/// Runs the full pipeline on one dataset with its own PCA fit.
pub fn analyze(ds: &EmbeddingDataset, cfg: &AnalysisConfig) -> Result<SeparationReport> {
    cfg.validate()?;
    if cfg.joint_fit {
        return Err(Error::Config("joint_fit needs several datasets; use analyze_joint".into()));
    }
    cfg.check_shape(ds.n(), ds.d())?;
    let x = ds.to_f64_matrix(cfg.normalize_embeddings);
    let pca = fit_pca(&x, cfg.k_metrics)?;
    report_from_projection(ds, &x, &pca, PcaFit::PerDataset, cfg)
}

/// Fits one PCA on the union of `datasets` and reports each dataset in that
/// shared space. All datasets must have the same dimensionality.
pub fn analyze_joint(datasets: &[&EmbeddingDataset], cfg: &AnalysisConfig) -> Result<Vec<SeparationReport>> {
    cfg.validate()?;
    let first = datasets
        .first()
        .ok_or_else(|| Error::Config("joint fit needs at least one dataset".into()))?;
    let d = first.d();
    if let Some(bad) = datasets.iter().find(|ds| ds.d() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.d(),
        });
    }
    let total: usize = datasets.iter().map(|ds| ds.n()).sum();
    cfg.check_shape(total, d)?;
    let parts: Vec<DMatrix<f64>> = datasets
        .iter()
        .map(|ds| ds.to_f64_matrix(cfg.normalize_embeddings))
        .collect();
    let mut stacked = DMatrix::zeros(total, d);
    let mut offset = 0;
    for p in &parts {
        stacked.view_mut((offset, 0), p.shape()).copy_from(p);
        offset += p.nrows();
    }
    let pca = fit_pca(&stacked, cfg.k_metrics)?;
    datasets
        .iter()
        .zip(&parts)
        .map(|(ds, x)| report_from_projection(ds, x, &pca, PcaFit::Joint, cfg))
        .collect()
}

fn report_from_projection(
    ds: &EmbeddingDataset,
    x: &DMatrix<f64>,
    pca: &PcaModel,
    pca_fit: PcaFit,
    cfg: &AnalysisConfig,
) -> Result<SeparationReport> {
    let labels = ds.labels();
    let evr = pca.explained_variance_ratio()?;
    let projected = pca.project(x)?;
    let visual = projected.columns(0, cfg.k_visual).into_owned();

    let (harmless, harmful) = fit_class_gaussians(&projected, labels, cfg.ridge_floor)?;
    let bd = bhattacharyya_distance(&harmless, &harmful)?;
    let ss = match cfg.silhouette_space {
        SilhouetteSpace::Pca => silhouette_score(&projected, labels)?,
        SilhouetteSpace::Raw => silhouette_score(x, labels)?,
    };
    let scatter_metrics = scatter_decomposition(&projected, labels)?;
    let scatter_visual = scatter_decomposition(&visual, labels)?;

    let cumulative = |k: usize| evr[..k].iter().sum::<f64>().min(1.0);
    Ok(SeparationReport {
        meta: ds.meta().clone(),
        balance: ds.balance(),
        pca_fit,
        evr_visual: Some(cumulative(cfg.k_visual)),
        evr_metrics: Some(cumulative(cfg.k_metrics)),
        explained_variance_ratio: evr,
        bd,
        ss,
        bcv_metrics: scatter_metrics.bcv_ratio,
        bcv_visual: Some(scatter_visual.bcv_ratio),
        trace_within_metrics: Some(scatter_metrics.trace_within),
        trace_between_metrics: Some(scatter_metrics.trace_between),
        ridge_used_harmful: Some(harmful.ridge_used),
        ridge_used_harmless: Some(harmless.ridge_used),
        config: cfg.clone(),
        projected_visual: visual.row_iter().map(|r| r.iter().copied().collect()).collect(),
        labels: labels.iter().map(|l| l.as_byte()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{test_meta, Stage};

    #[test]
    fn config_bounds() {
        assert!(AnalysisConfig::default().validate().is_ok());
        let bad = |f: fn(&mut AnalysisConfig)| {
            let mut c = AnalysisConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.k_visual = 1));
        assert!(bad(|c| c.k_visual = 11));
        assert!(bad(|c| c.k_metrics = 65));
        assert!(bad(|c| c.ridge_floor = -1.0));
    }

    #[test]
    fn config_file_fields_default_individually() {
        let c: AnalysisConfig = serde_json::from_str(r#"{"k_metrics": 5}"#).unwrap();
        assert_eq!(c.k_metrics, 5);
        assert_eq!(c.k_visual, 2);
        assert!(serde_json::from_str::<AnalysisConfig>(r#"{"k_metric": 5}"#).is_err());
    }

    #[test]
    fn infeasible_shape_is_a_config_error() {
        let ds = synth_dataset(3, 4, 1.0, 0, test_meta()).unwrap();
        let err = analyze(&ds, &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.contains("k_metrics")));
    }

    #[test]
    fn report_ranges_and_projection() {
        let ds = synth_dataset(200, 12, 3.0, 5, test_meta()).unwrap();
        let r = analyze(&ds, &AnalysisConfig::default()).unwrap();
        r.validate().unwrap();
        assert_eq!(r.projected_visual.len(), 400);
        assert_eq!(r.projected_visual[0].len(), 2);
        assert_eq!(r.explained_variance_ratio.len(), 10);
        assert!(r.evr_visual.unwrap() <= r.evr_metrics.unwrap());
        assert!(r.bd > 0.5 && r.ss > 0.1, "bd {} ss {}", r.bd, r.ss);
        assert_eq!(r.pca_fit, PcaFit::PerDataset);
    }

    #[test]
    fn joint_fit_shares_one_projection() {
        let a = synth_dataset(100, 12, 2.0, 1, test_meta()).unwrap();
        let mut meta = test_meta();
        meta.stage = Stage::Aligned;
        let b = synth_dataset(100, 12, 4.0, 2, meta).unwrap();
        let cfg = AnalysisConfig::default();
        let reports = analyze_joint(&[&a, &b], &cfg).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.pca_fit == PcaFit::Joint));
        assert_eq!(reports[0].explained_variance_ratio, reports[1].explained_variance_ratio);
        assert!(reports[1].bd > reports[0].bd);

        let mut joint_cfg = cfg.clone();
        joint_cfg.joint_fit = true;
        assert!(analyze(&a, &joint_cfg).is_err());

        let c = synth_dataset(100, 8, 2.0, 1, test_meta()).unwrap();
        assert!(matches!(analyze_joint(&[&a, &c], &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn raw_silhouette_space_differs_from_pca_space() {
        let ds = synth_dataset(150, 20, 2.0, 9, test_meta()).unwrap();
        let cfg = AnalysisConfig {
            silhouette_space: SilhouetteSpace::Raw,
            ..AnalysisConfig::default()
        };
        let raw = analyze(&ds, &cfg).unwrap();
        let pca = analyze(&ds, &AnalysisConfig::default()).unwrap();
        // dropping 10 noise dimensions sharpens the clusters
        assert!(pca.ss > raw.ss);
        assert_eq!(raw.bd, pca.bd);
    }

    #[test]
    fn normalization_changes_embedding_scale_only() {
        let ds = synth_dataset(100, 10, 3.0, 4, test_meta()).unwrap();
        let cfg = AnalysisConfig {
            normalize_embeddings: true,
            ..AnalysisConfig::default()
        };
        let r = analyze(&ds, &cfg).unwrap();
        r.validate().unwrap();
        assert!(r.config.normalize_embeddings);
    }
}
