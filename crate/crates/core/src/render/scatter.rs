use std::fmt::Write;

use super::{escape, open_document, text};
use crate::analysis::SeparationReport;
use crate::dataset::{ClassLabel, Stage};
use crate::error::{Error, Result};

pub const HARMLESS_COLOR: &str = "#1b9e77";
pub const HARMFUL_COLOR: &str = "#d95f02";

const SIZE: u32 = 480;
const MARGIN: f64 = 60.0;

/// A 2-component projection colored by class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSpec {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<ClassLabel>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl ScatterSpec {
    /// Builds the spec from a computed report's retained projection.
    pub fn from_report(report: &SeparationReport) -> Result<Self> {
        if report.projected_visual.is_empty() {
            return Err(Error::Render(format!(
                "report for {} {} {} has no retained projection",
                report.meta.model_id, report.meta.language, report.meta.stage
            )));
        }
        let points = report
            .projected_visual
            .iter()
            .map(|row| match row.as_slice() {
                [x, y, ..] => Ok([*x, *y]),
                _ => Err(Error::Render("projection has fewer than 2 components".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let stage = match report.meta.stage {
            Stage::Reference => "π_ref",
            Stage::Aligned => "π_θ",
        };
        let axis = |i: usize| match report.explained_variance_ratio.get(i) {
            Some(r) => format!("PC{} ({:.2}% variance)", i + 1, r * 100.0),
            None => format!("PC{}", i + 1),
        };
        Ok(ScatterSpec {
            points,
            labels: report.class_labels()?,
            title: format!("{stage}-{}", report.meta.language),
            x_label: axis(0),
            y_label: axis(1),
        })
    }
}

pub fn render_scatter(spec: &ScatterSpec) -> Result<String> {
    if spec.points.is_empty() {
        return Err(Error::Render("scatter plot needs at least one point".into()));
    }
    if spec.points.len() != spec.labels.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.points.len(),
            actual: spec.labels.len(),
        });
    }
    let (x_lo, x_hi) = padded_range(spec.points.iter().map(|p| p[0]));
    let (y_lo, y_hi) = padded_range(spec.points.iter().map(|p| p[1]));
    let plot = f64::from(SIZE) - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * plot;
    let py = |y: f64| f64::from(SIZE) - MARGIN - (y - y_lo) / (y_hi - y_lo) * plot;

    let mut out = String::new();
    open_document(&mut out, SIZE, SIZE);
    let _ = writeln!(out, "<title>{}</title>", escape(&spec.title));
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    text(&mut out, f64::from(SIZE) / 2.0, MARGIN / 2.0, "middle", 16, &spec.title, "");
    text(&mut out, f64::from(SIZE) / 2.0, f64::from(SIZE) - MARGIN / 3.0, "middle", 12, &spec.x_label, "");
    let cy = f64::from(SIZE) / 2.0;
    text(
        &mut out,
        MARGIN / 3.0,
        cy,
        "middle",
        12,
        &spec.y_label,
        &format!(r#" transform="rotate(-90 {:.2} {cy:.2})""#, MARGIN / 3.0),
    );
    for (i, (v, anchor)) in [(x_lo, "start"), (x_hi, "end")].into_iter().enumerate() {
        let x = if i == 0 { MARGIN } else { MARGIN + plot };
        text(&mut out, x, MARGIN + plot + 14.0, anchor, 10, &format!("{v:.2}"), "");
    }
    for (v, y) in [(y_lo, MARGIN + plot), (y_hi, MARGIN + 10.0)] {
        text(&mut out, MARGIN - 4.0, y, "end", 10, &format!("{v:.2}"), "");
    }

    let _ = writeln!(out, r#"<g class="points">"#);
    for (p, label) in spec.points.iter().zip(&spec.labels) {
        let (color, class) = style(*label);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="{color}" fill-opacity="0.6" data-label="{class}"/>"#,
            px(p[0]),
            py(p[1])
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="legend">"#);
    for (row, label) in [ClassLabel::Harmless, ClassLabel::Harmful].into_iter().enumerate() {
        let (color, class) = style(label);
        let y = MARGIN + 8.0 + 16.0 * row as f64;
        let x = MARGIN + plot - 80.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{color}" data-legend="{class}"/>"#,
            y - 9.0
        );
        text(&mut out, x + 14.0, y, "start", 11, class, "");
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

fn style(label: ClassLabel) -> (&'static str, &'static str) {
    match label {
        ClassLabel::Harmless => (HARMLESS_COLOR, "harmless"),
        ClassLabel::Harmful => (HARMFUL_COLOR, "harmful"),
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}
