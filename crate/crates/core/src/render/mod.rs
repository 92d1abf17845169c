//! Standalone SVG figures and the before/after metric table.

mod radar;
mod scatter;
mod table;

pub use radar::{radial_fraction, render_radar, RadarSpec, RADAR_DOMAIN};
pub use scatter::{render_scatter, ScatterSpec, HARMFUL_COLOR, HARMLESS_COLOR};
pub use table::{language_name, render_table, RenderedTable};

use std::fmt::Write;

/// `{figure_kind}_{model}_{language}_{stage}.svg`, with path-hostile
/// characters in the model id replaced by `_`.
pub fn figure_file_name(kind: &str, model: &str, language: &str, stage: &str) -> String {
    let model: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') { c } else { '_' })
        .collect();
    format!("{kind}_{model}_{language}_{stage}.svg")
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn open_document(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
}

pub(crate) fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: u32, body: &str, extra: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}"{extra}>{}</text>"#,
        escape(body)
    );
}
