use serde::{Deserialize, Serialize};

use super::SeparationReport;
use crate::dataset::{DatasetMeta, Stage};
use crate::error::{Error, Result};

/// Below this reference BD the ratio is reported as absent.
pub const RATIO_BD_MIN_REFERENCE: f64 = 1e-12;
pub const LOG10_BD_MIN: f64 = -3.0;
pub const LOG10_BD_MAX: f64 = 1.0;

/// Before/after deltas between a reference and an aligned report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub meta_ref: DatasetMeta,
    pub meta_aligned: DatasetMeta,
    pub delta_bd: f64,
    pub ratio_bd: Option<f64>,
    pub delta_ss: f64,
    /// Percentage points, k_metrics space.
    pub delta_bcv_pp_metrics: f64,
    /// Percentage points, k_visual space; absent if either side lacks it.
    pub delta_bcv_pp_visual: Option<f64>,
    pub log10_bd_ref: f64,
    pub log10_bd_aligned: f64,
}

pub fn compare(reference: &SeparationReport, aligned: &SeparationReport) -> Result<ComparisonReport> {
    let (r, a) = (&reference.meta, &aligned.meta);
    if r.stage != Stage::Reference {
        return Err(Error::Mismatch(format!("first report has stage {}, expected reference", r.stage)));
    }
    if a.stage != Stage::Aligned {
        return Err(Error::Mismatch(format!("second report has stage {}, expected aligned", a.stage)));
    }
    if r.language != a.language {
        return Err(Error::Mismatch(format!("language {} vs {}", r.language, a.language)));
    }
    if r.corpus_id != a.corpus_id {
        return Err(Error::Mismatch(format!("corpus {} vs {}", r.corpus_id, a.corpus_id)));
    }

    let ratio_bd = (reference.bd >= RATIO_BD_MIN_REFERENCE).then(|| aligned.bd / reference.bd);
    let delta_bcv_pp_visual = match (reference.bcv_visual, aligned.bcv_visual) {
        (Some(x), Some(y)) => Some((y - x) * 100.0),
        _ => None,
    };
    Ok(ComparisonReport {
        meta_ref: r.clone(),
        meta_aligned: a.clone(),
        delta_bd: aligned.bd - reference.bd,
        ratio_bd,
        delta_ss: aligned.ss - reference.ss,
        delta_bcv_pp_metrics: (aligned.bcv_metrics - reference.bcv_metrics) * 100.0,
        delta_bcv_pp_visual,
        log10_bd_ref: clamped_log10(reference.bd),
        log10_bd_aligned: clamped_log10(aligned.bd),
    })
}

pub(crate) fn clamped_log10(v: f64) -> f64 {
    if v > 0.0 {
        v.log10().clamp(LOG10_BD_MIN, LOG10_BD_MAX)
    } else {
        LOG10_BD_MIN
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, synth_dataset, AnalysisConfig};
    use crate::dataset::test_meta;

    fn pair() -> (SeparationReport, SeparationReport) {
        let ds = synth_dataset(60, 10, 2.0, 3, test_meta()).unwrap();
        let r = analyze(&ds, &AnalysisConfig::default()).unwrap();
        let mut a = r.clone();
        a.meta.stage = Stage::Aligned;
        (r, a)
    }

    #[test]
    fn flipped_duplicate_has_zero_deltas() {
        let (r, a) = pair();
        let c = compare(&r, &a).unwrap();
        assert_eq!(c.delta_bd, 0.0);
        assert_eq!(c.delta_ss, 0.0);
        assert_eq!(c.delta_bcv_pp_metrics, 0.0);
        assert_eq!(c.delta_bcv_pp_visual, Some(0.0));
        assert_eq!(c.ratio_bd, Some(1.0));
    }

    #[test]
    fn rejects_mismatches() {
        let (r, a) = pair();
        assert!(compare(&a, &r).is_err());
        assert!(compare(&r, &r).is_err());
        let mut other_lang = a.clone();
        other_lang.meta.language = "de".into();
        assert!(matches!(compare(&r, &other_lang), Err(Error::Mismatch(m)) if m.contains("language")));
        let mut other_corpus = a;
        other_corpus.meta.corpus_id = "other".into();
        assert!(matches!(compare(&r, &other_corpus), Err(Error::Mismatch(m)) if m.contains("corpus")));
    }

    #[test]
    fn ratio_suppressed_for_zero_reference() {
        let (mut r, mut a) = pair();
        r.bd = 0.0;
        a.bd = 20.0;
        let c = compare(&r, &a).unwrap();
        assert_eq!(c.ratio_bd, None);
        assert_eq!(c.log10_bd_ref, -3.0);
        assert_eq!(c.log10_bd_aligned, 1.0);
    }
}
