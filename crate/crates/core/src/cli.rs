//! Command-line front end. Exit codes: 0 success, 1 environment or I/O
//! failure, 2 validation or domain error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    analyze_joint, batch_analyze, comparison_table, read_report_dir, read_reports, AnalysisConfig, ComparisonRow,
    Manifest, SeparationReport, SilhouetteSpace,
};
use crate::dataset::{
    load_dataset, save_dataset, DatasetFormat, DatasetMeta, FileFormat, Pooling, Stage,
};
use crate::error::{Error, Result};
use crate::render::{
    figure_file_name, render_radar, render_scatter, render_table, RadarSpec, ScatterSpec,
};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "ALIGNPROBE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "alignprobe", version, about = "Harmful/harmless cluster separation in LLM embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a labeled CSV into an EMB1 dataset
    Ingest(IngestArgs),
    /// Compute separation reports for one or more EMB1 datasets
    Analyze(AnalyzeArgs),
    /// Join reference and aligned reports into a before/after table
    Compare(CompareArgs),
    /// Render scatter plots, radar charts or the metric table
    Plot(PlotArgs),
    /// Write a synthetic two-Gaussian EMB1 dataset
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StageArg {
    Reference,
    Aligned,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Reference => Stage::Reference,
            StageArg::Aligned => Stage::Aligned,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PoolingArg {
    LastToken,
    Mean,
}

#[derive(Debug, Clone, Args)]
pub struct MetaArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub language: String,
    #[arg(long, value_enum)]
    pub stage: StageArg,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub layer: i64,
    #[arg(long, value_enum, default_value = "last-token")]
    pub pooling: PoolingArg,
    #[arg(long, default_value = "unspecified")]
    pub corpus: String,
}

impl MetaArgs {
    fn to_meta(&self) -> DatasetMeta {
        DatasetMeta {
            model_id: self.model.clone(),
            language: self.language.clone(),
            stage: self.stage.into(),
            layer: self.layer,
            pooling: match self.pooling {
                PoolingArg::LastToken => Pooling::LastToken,
                PoolingArg::Mean => Pooling::Mean,
            },
            corpus_id: self.corpus.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub meta: MetaArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SilhouetteSpaceArg {
    Pca,
    Raw,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Dataset paths or glob patterns, processed in lexicographic order
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// Report JSON output (an array, one object per dataset)
    #[arg(long)]
    pub output: PathBuf,
    /// JSON config file; flags take precedence over it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k_visual: Option<usize>,
    #[arg(long)]
    pub k_metrics: Option<usize>,
    #[arg(long)]
    pub ridge_floor: Option<f64>,
    /// Scale every embedding to unit L2 norm before PCA
    #[arg(long)]
    pub normalize: bool,
    /// Fit one PCA over all inputs instead of one per dataset
    #[arg(long)]
    pub joint_fit: bool,
    #[arg(long, value_enum)]
    pub silhouette_space: Option<SilhouetteSpaceArg>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of report JSON files
    #[arg(long)]
    pub reports: PathBuf,
    /// Output path; the table is written as `<stem>.json` and `<stem>.txt`
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Scatter,
    Radar,
    Table,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Report files (scatter) or comparison-table JSON files (radar, table)
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Points per class
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub gap: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "synthetic")]
    pub model: String,
    #[arg(long, default_value = "en")]
    pub language: String,
    #[arg(long, value_enum, default_value = "reference")]
    pub stage: StageArg,
    #[arg(long, default_value = "synthetic")]
    pub corpus: String,
}

/// Worker count from `ALIGNPROBE_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        1
    } else {
        2
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Plot(a) => plot(a),
        Command::Synth(a) => synth(a),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let ds = load_dataset(&a.input, DatasetFormat::Csv(a.meta.to_meta()))?;
    save_dataset(&ds, &a.output, FileFormat::Emb1)?;
    println!("{}", serde_json::to_string(&ds.balance())?);
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let meta = DatasetMeta {
        model_id: a.model,
        language: a.language,
        stage: a.stage.into(),
        layer: -1,
        pooling: Pooling::LastToken,
        corpus_id: a.corpus,
    };
    let ds = crate::analysis::synth_dataset(a.n, a.k, a.gap, a.seed, meta)?;
    save_dataset(&ds, &a.output, FileFormat::Emb1)
}

/// Effective config: defaults, then the config file, then flags.
pub fn effective_config(a: &AnalyzeArgs) -> Result<AnalysisConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => AnalysisConfig::default(),
    };
    if let Some(k) = a.k_visual {
        cfg.k_visual = k;
    }
    if let Some(k) = a.k_metrics {
        cfg.k_metrics = k;
    }
    if let Some(r) = a.ridge_floor {
        cfg.ridge_floor = r;
    }
    if a.normalize {
        cfg.normalize_embeddings = true;
    }
    if a.joint_fit {
        cfg.joint_fit = true;
    }
    if let Some(s) = a.silhouette_space {
        cfg.silhouette_space = match s {
            SilhouetteSpaceArg::Pca => SilhouetteSpace::Pca,
            SilhouetteSpaceArg::Raw => SilhouetteSpace::Raw,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Expands glob patterns; literal paths pass through. Sorted, deduplicated.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pat in patterns {
        let is_glob = pat.contains(['*', '?', '[']);
        if !is_glob {
            out.push(PathBuf::from(pat));
            continue;
        }
        let matches = glob::glob(pat).map_err(|e| Error::Config(format!("bad glob {pat:?}: {e}")))?;
        let mut n = 0;
        for m in matches {
            out.push(m.map_err(|e| {
                let path = e.path().to_path_buf();
                Error::io(path, e.into())
            })?);
            n += 1;
        }
        if n == 0 {
            return Err(Error::Config(format!("pattern {pat:?} matched no files")));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<()> {
    let cfg = effective_config(&a)?;
    let paths = expand_inputs(&a.inputs)?;

    let mut reports: Vec<SeparationReport> = Vec::new();
    let mut first_error: Option<Error> = None;
    if cfg.joint_fit {
        let datasets = paths
            .iter()
            .map(|p| load_dataset(p, DatasetFormat::Emb1))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = datasets.iter().collect();
        reports = analyze_joint(&refs, &cfg)?;
    } else {
        let inputs: Vec<(PathBuf, AnalysisConfig)> = paths.iter().map(|p| (p.clone(), cfg.clone())).collect();
        let outcome = batch_analyze(&inputs, None);
        for r in outcome.reports {
            match r {
                Ok(rep) => reports.push(rep),
                Err(f) => {
                    eprintln!("error: {}: {}", f.path.display(), f.error);
                    // validation failures outrank I/O failures for the exit code
                    if first_error.as_ref().is_none_or(|e| e.is_io() && !f.error.is_io()) {
                        first_error = Some(f.error);
                    }
                }
            }
        }
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for r in &reports {
        let _ = writeln!(
            out,
            "{} {} {} {:.4} {:.4} {:.4} {:.4}",
            r.meta.model_id,
            r.meta.language,
            r.meta.stage,
            r.bd,
            r.ss,
            r.bcv_metrics,
            r.evr_visual.unwrap_or(f64::NAN)
        );
    }
    write_json(&a.output, &reports)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn compare_cmd(a: CompareArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let reports = read_report_dir(&a.reports)?;
    let table = comparison_table(&manifest, &reports);
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    if !table.missing.is_empty() {
        for m in &table.missing {
            eprintln!("error: {m}");
        }
        return Err(Error::Mismatch(format!("{} manifest pair(s) lack an aligned report", table.missing.len())));
    }
    let rendered = render_table(&table.rows)?;
    let json_path = a.output.with_extension("json");
    let txt_path = a.output.with_extension("txt");
    fs::write(&json_path, &rendered.json).map_err(|e| Error::io(&json_path, e))?;
    fs::write(&txt_path, &rendered.text).map_err(|e| Error::io(&txt_path, e))?;
    print!("{}", rendered.text);
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<ComparisonRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("comparison table {}: {e}", path.display())))
}

fn plot(a: PlotArgs) -> Result<()> {
    fs::create_dir_all(&a.output_dir).map_err(|e| Error::io(&a.output_dir, e))?;
    let write = |name: &str, body: &str| -> Result<()> {
        let path = a.output_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        println!("{}", path.display());
        Ok(())
    };
    match a.kind {
        PlotKind::Scatter => {
            for input in &a.inputs {
                for r in read_reports(input)? {
                    let svg = render_scatter(&ScatterSpec::from_report(&r)?)?;
                    let name = figure_file_name("scatter", &r.meta.model_id, &r.meta.language, r.meta.stage.as_str());
                    write(&name, &svg)?;
                }
            }
        }
        PlotKind::Radar => {
            let rows = collect_rows(&a.inputs)?;
            for spec in radar_specs(&rows) {
                let svg = render_radar(&spec.1)?;
                write(&figure_file_name("radar", "all-models", &spec.0, "both"), &svg)?;
            }
        }
        PlotKind::Table => {
            let rows = collect_rows(&a.inputs)?;
            let t = render_table(&rows)?;
            write("table.txt", &t.text)?;
            write("table.json", &t.json)?;
        }
    }
    Ok(())
}

fn collect_rows(inputs: &[PathBuf]) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_rows(p)?);
    }
    Ok(rows)
}

/// One radar per language, one axis per model family, in row order.
pub fn radar_specs(rows: &[ComparisonRow]) -> Vec<(String, RadarSpec)> {
    let mut languages: Vec<&str> = Vec::new();
    for r in rows {
        if !languages.contains(&r.language.as_str()) {
            languages.push(&r.language);
        }
    }
    languages
        .into_iter()
        .map(|lang| {
            let group: Vec<&ComparisonRow> = rows.iter().filter(|r| r.language == lang).collect();
            let multi_corpus = group.iter().any(|r| r.corpus_id != group[0].corpus_id);
            let spec = RadarSpec {
                title: format!("Bhattacharyya distance ({})", crate::render::language_name(lang)),
                axes: group
                    .iter()
                    .map(|r| {
                        if multi_corpus {
                            format!("{} ({})", r.family, r.corpus_id)
                        } else {
                            r.family.clone()
                        }
                    })
                    .collect(),
                reference: group.iter().map(|r| r.reference.map(|t| t.bd)).collect(),
                aligned: group.iter().map(|r| Some(r.aligned.bd)).collect(),
            };
            (lang.to_string(), spec)
        })
        .collect()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("cfg.json");
        fs::write(&cfg_path, r#"{"k_metrics": 6, "ridge_floor": 1e-4}"#).unwrap();
        let cli = Cli::try_parse_from([
            "alignprobe", "analyze", "x.emb1", "--output", "r.json", "--config", cfg_path.to_str().unwrap(),
            "--k-metrics", "8",
        ])
        .unwrap();
        let Command::Analyze(a) = cli.command else { panic!() };
        let cfg = effective_config(&a).unwrap();
        assert_eq!(cfg.k_metrics, 8);
        assert_eq!(cfg.ridge_floor, 1e-4);
        assert_eq!(cfg.k_visual, 2);
    }

    #[test]
    fn globs_expand_in_lexicographic_order() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.emb1", "a.emb1", "c.txt"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        let pat = format!("{}/*.emb1", dir.path().display());
        let got = expand_inputs(&[pat.clone(), dir.path().join("a.emb1").display().to_string()]).unwrap();
        assert_eq!(got, vec![dir.path().join("a.emb1"), dir.path().join("b.emb1")]);
        assert!(expand_inputs(&[format!("{}/*.none", dir.path().display())]).is_err());
    }
}
