use crate::analysis::{ComparisonRow, MetricTriple};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTable {
    pub text: String,
    pub json: String,
}

pub fn language_name(code: &str) -> &str {
    match code {
        "en" => "English",
        "hi" => "Hindi",
        "zh" => "Chinese",
        "de" => "German",
        "fr" => "French",
        "es" => "Spanish",
        "ru" => "Russian",
        "ar" => "Arabic",
        "am" => "Amharic",
        "uk" => "Ukrainian",
        other => other,
    }
}

/// Aligned-column text table (hyphens for absent reference checkpoints)
/// plus the same rows as JSON.
pub fn render_table(rows: &[ComparisonRow]) -> Result<RenderedTable> {
    let header = [
        "Model", "Language", "Ref BD", "Ref SS", "Ref BCV", "Aligned BD", "Aligned SS", "Aligned BCV",
    ];
    let fmt_triple = |t: Option<&MetricTriple>| -> [String; 3] {
        match t {
            Some(t) => [format!("{:.4}", t.bd), format!("{:.4}", t.ss), format!("{:.4}", t.bcv)],
            None => ["-".into(), "-".into(), "-".into()],
        }
    };
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    let mut last_family: Option<&str> = None;
    for row in rows {
        // family name only on the first row of its group
        let family = if last_family == Some(row.family.as_str()) { "" } else { row.family.as_str() };
        last_family = Some(&row.family);
        let mut line = vec![family.to_string(), language_name(&row.language).to_string()];
        line.extend(fmt_triple(row.reference.as_ref()));
        line.extend(fmt_triple(Some(&row.aligned)));
        cells.push(line);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();

    let mut text = String::new();
    for (i, line) in cells.iter().enumerate() {
        let padded: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c < 2 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        text.push_str(padded.join(" | ").trim_end());
        text.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            text.push_str(&rule.join("-+-"));
            text.push('\n');
        }
    }
    let json = serde_json::to_string_pretty(rows)?;
    Ok(RenderedTable { text, json })
}
