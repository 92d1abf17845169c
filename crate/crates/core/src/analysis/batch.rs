use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analyze, compare, AnalysisConfig, ComparisonReport, SeparationReport};
use crate::dataset::{load_dataset, DatasetFormat, FileFormat, Stage};
use crate::error::{Error, Result};

/// Pairs reference and aligned checkpoints into model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub family: String,
    /// `None` when only the aligned checkpoint exists.
    pub reference_model_id: Option<String>,
    pub aligned_model_id: String,
    pub languages: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("manifest {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub bd: f64,
    pub ss: f64,
    pub bcv: f64,
}

impl From<&SeparationReport> for MetricTriple {
    fn from(r: &SeparationReport) -> Self {
        MetricTriple {
            bd: r.bd,
            ss: r.ss,
            bcv: r.bcv_metrics,
        }
    }
}

/// One line of the before/after table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub family: String,
    pub language: String,
    pub corpus_id: String,
    pub reference_model_id: Option<String>,
    pub aligned_model_id: String,
    pub reference: Option<MetricTriple>,
    pub aligned: MetricTriple,
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Manifest (family, language) pairs with no aligned report.
    pub missing: Vec<String>,
    /// Declared reference checkpoints whose report was not found.
    pub warnings: Vec<String>,
}

/// Joins reports into rows grouped by (family, language, corpus), in
/// manifest order.
pub fn comparison_table(manifest: &Manifest, reports: &[SeparationReport]) -> ComparisonTable {
    let mut table = ComparisonTable::default();
    fn find<'a>(
        reports: &'a [SeparationReport],
        model: &'a str,
        lang: &'a str,
        stage: Stage,
    ) -> impl Iterator<Item = &'a SeparationReport> {
        reports
            .iter()
            .filter(move |r| r.meta.model_id == model && r.meta.language == lang && r.meta.stage == stage)
    }
    for entry in &manifest.entries {
        for lang in &entry.languages {
            let aligned: Vec<&SeparationReport> = find(reports, &entry.aligned_model_id, lang, Stage::Aligned).collect();
            if aligned.is_empty() {
                table.missing.push(format!(
                    "{} / {lang}: no aligned report for {}",
                    entry.family, entry.aligned_model_id
                ));
                continue;
            }
            let mut corpora: Vec<&str> = Vec::new();
            for r in &aligned {
                if !corpora.contains(&r.meta.corpus_id.as_str()) {
                    corpora.push(&r.meta.corpus_id);
                }
            }
            for corpus in corpora {
                let al = aligned.iter().find(|r| r.meta.corpus_id == corpus).unwrap();
                let reference = entry.reference_model_id.as_deref().and_then(|id| {
                    let found = find(reports, id, lang, Stage::Reference).find(|r| r.meta.corpus_id == corpus);
                    if found.is_none() {
                        table.warnings.push(format!(
                            "{} / {lang} / {corpus}: no reference report for {id}",
                            entry.family
                        ));
                    }
                    found
                });
                table.rows.push(ComparisonRow {
                    family: entry.family.clone(),
                    language: lang.clone(),
                    corpus_id: corpus.to_string(),
                    reference_model_id: entry.reference_model_id.clone(),
                    aligned_model_id: entry.aligned_model_id.clone(),
                    reference: reference.map(MetricTriple::from),
                    aligned: MetricTriple::from(*al),
                    comparison: reference.and_then(|r| compare(r, al).ok()),
                });
            }
        }
    }
    table
}

#[derive(Debug)]
pub struct BatchFailure {
    pub path: PathBuf,
    pub error: Error,
}

#[derive(Debug)]
pub struct BatchOutcome {
    /// One entry per input, in input order.
    pub reports: Vec<std::result::Result<SeparationReport, BatchFailure>>,
    pub table: Option<ComparisonTable>,
}

impl BatchOutcome {
    pub fn successes(&self) -> impl Iterator<Item = &SeparationReport> {
        self.reports.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &BatchFailure> {
        self.reports.iter().filter_map(|r| r.as_ref().err())
    }
}

/// Analyzes every EMB1 input (one worker per dataset), collecting failures
/// instead of aborting, and joins the results when a manifest is given.
pub fn batch_analyze(inputs: &[(PathBuf, AnalysisConfig)], manifest: Option<&Manifest>) -> BatchOutcome {
    let reports: Vec<_> = inputs
        .par_iter()
        .map(|(path, cfg)| {
            analyze_path(path, cfg).map_err(|error| BatchFailure {
                path: path.clone(),
                error,
            })
        })
        .collect();
    let table = manifest.map(|m| {
        let ok: Vec<SeparationReport> = reports.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        comparison_table(m, &ok)
    });
    BatchOutcome { reports, table }
}

fn analyze_path(path: &Path, cfg: &AnalysisConfig) -> Result<SeparationReport> {
    if FileFormat::from_path(path) == FileFormat::Csv {
        return Err(Error::Format("CSV datasets carry no metadata; ingest them to EMB1 first".into()));
    }
    let ds = load_dataset(path, DatasetFormat::Emb1)?;
    analyze(&ds, cfg)
}

/// Reads a report file holding either one report object or an array of them.
pub fn read_reports(path: &Path) -> Result<Vec<SeparationReport>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Box<SeparationReport>),
        Many(Vec<SeparationReport>),
    }
    let reports = match serde_json::from_str::<OneOrMany>(&text) {
        Ok(OneOrMany::One(r)) => vec![*r],
        Ok(OneOrMany::Many(v)) => v,
        Err(e) => return Err(Error::Validation(format!("report {}: {e}", path.display()))),
    };
    for r in &reports {
        r.validate()
            .map_err(|e| Error::Validation(format!("report {}: {e}", path.display())))?;
    }
    Ok(reports)
}

/// Reads every `*.json` report in `dir`, in lexicographic path order.
pub fn read_report_dir(dir: &Path) -> Result<Vec<SeparationReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_reports(&p)?);
    }
    Ok(out)
}
