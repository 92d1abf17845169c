use std::f64::consts::PI;
use std::fmt::Write;

use super::{escape, open_document, text};
use crate::error::{Error, Result};

/// Log-scale domain of the radial axis.
pub const RADAR_DOMAIN: (f64, f64) = (1e-3, 1e1);

const SIZE: u32 = 560;
const RADIUS: f64 = 190.0;
const REFERENCE_COLOR: &str = "#1f77b4";
const ALIGNED_COLOR: &str = "#2ca02c";

/// Bhattacharyya distances per model before and after alignment.
/// `None` marks a missing checkpoint; it is drawn at the domain floor.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarSpec {
    pub title: String,
    pub axes: Vec<String>,
    pub reference: Vec<Option<f64>>,
    pub aligned: Vec<Option<f64>>,
}

/// Position of `value` along a spoke, 0 at 1e-3 and 1 at 1e+1.
pub fn radial_fraction(value: f64) -> f64 {
    let (lo, hi) = RADAR_DOMAIN;
    let v = if value.is_nan() { lo } else { value.clamp(lo, hi) };
    (v.log10() - lo.log10()) / (hi.log10() - lo.log10())
}

fn clamp_state(value: Option<f64>) -> &'static str {
    let (lo, hi) = RADAR_DOMAIN;
    match value {
        None => "missing",
        Some(v) if v.is_nan() || v < lo => "floor",
        Some(v) if v > hi => "ceiling",
        Some(_) => "none",
    }
}

pub fn render_radar(spec: &RadarSpec) -> Result<String> {
    let n = spec.axes.len();
    if n < 3 {
        return Err(Error::Render(format!("radar chart needs at least 3 axes, got {n}")));
    }
    if spec.reference.len() != n || spec.aligned.len() != n {
        return Err(Error::Render("each radar series needs one value per axis".into()));
    }
    let center = (f64::from(SIZE) / 2.0, f64::from(SIZE) / 2.0 + 10.0);
    let angle = |i: usize| -PI / 2.0 + 2.0 * PI * i as f64 / n as f64;
    let at = |i: usize, frac: f64| {
        let a = angle(i);
        (center.0 + RADIUS * frac * a.cos(), center.1 + RADIUS * frac * a.sin())
    };

    let mut out = String::new();
    open_document(&mut out, SIZE, SIZE);
    let _ = writeln!(out, "<title>{}</title>", escape(&spec.title));
    text(&mut out, center.0, 28.0, "middle", 16, &spec.title, "");

    let _ = writeln!(out, r#"<g class="grid">"#);
    for exp in -3..=1 {
        let frac = radial_fraction(10f64.powi(exp));
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#cccccc" data-decade="1e{exp}"/>"##,
            center.0,
            center.1,
            RADIUS * frac
        );
        text(
            &mut out,
            center.0 + 3.0,
            center.1 - RADIUS * frac - 2.0,
            "start",
            9,
            &format!("1e{exp}"),
            r##" fill="#888888""##,
        );
    }
    for (i, name) in spec.axes.iter().enumerate() {
        let (x, y) = at(i, 1.0);
        let _ = writeln!(
            out,
            r##"<line x1="{:.3}" y1="{:.3}" x2="{x:.3}" y2="{y:.3}" stroke="#cccccc"/>"##,
            center.0, center.1
        );
        let (lx, ly) = at(i, 1.12);
        text(&mut out, lx, ly + 4.0, "middle", 11, name, "");
    }
    let _ = writeln!(out, "</g>");

    // reference first so the aligned series paints over it
    for (class, color, values) in [
        ("reference", REFERENCE_COLOR, &spec.reference),
        ("aligned", ALIGNED_COLOR, &spec.aligned),
    ] {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (x, y) = at(i, radial_fraction(v.unwrap_or(RADAR_DOMAIN.0)));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let raw: Vec<String> = values
            .iter()
            .map(|v| v.map_or_else(|| "-".to_string(), |v| v.to_string()))
            .collect();
        let clamped: Vec<&str> = values.iter().map(|v| clamp_state(*v)).collect();
        let _ = writeln!(
            out,
            r#"<polygon class="series-{class}" points="{}" fill="{color}" fill-opacity="0.2" stroke="{color}" stroke-width="2" data-values="{}" data-clamped="{}"/>"#,
            points.join(" "),
            raw.join(","),
            clamped.join(",")
        );
    }

    for (row, (class, color)) in [("reference (before)", REFERENCE_COLOR), ("aligned (after)", ALIGNED_COLOR)]
        .into_iter()
        .enumerate()
    {
        let y = f64::from(SIZE) - 36.0 + 16.0 * row as f64;
        let _ = writeln!(
            out,
            r#"<rect x="20" y="{:.2}" width="10" height="10" fill="{color}"/>"#,
            y - 9.0
        );
        text(&mut out, 34.0, y, "start", 11, class, "");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_transform() {
        assert!((radial_fraction(2.5871) - (2.5871f64.log10() + 3.0) / 4.0).abs() < 1e-15);
        assert!((radial_fraction(2.5871) - 0.853_203).abs() < 1e-6);
        assert_eq!(radial_fraction(1e-5), 0.0);
        assert_eq!(radial_fraction(0.0), 0.0);
        assert_eq!(radial_fraction(1e3), 1.0);
        assert_eq!(radial_fraction(1.0), 0.75);
    }

    #[test]
    fn identical_series_coincide() {
        let v = vec![Some(0.1), Some(1.0), Some(0.01)];
        let spec = RadarSpec {
            title: "t".into(),
            axes: vec!["a".into(), "b".into(), "c".into()],
            reference: v.clone(),
            aligned: v,
        };
        let svg = render_radar(&spec).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let polys: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polygon")).collect();
        assert_eq!(polys.len(), 2);
        assert_eq!(polys[0].attribute("class"), Some("series-reference"));
        assert_eq!(polys[0].attribute("points"), polys[1].attribute("points"));
        let decades: Vec<_> = doc.descendants().filter_map(|n| n.attribute("data-decade")).collect();
        assert_eq!(decades, vec!["1e-3", "1e-2", "1e-1", "1e0", "1e1"]);
    }

    #[test]
    fn clamping_is_annotated() {
        let spec = RadarSpec {
            title: "t".into(),
            axes: vec!["a".into(), "b".into(), "c".into()],
            reference: vec![None, Some(1e-4), Some(50.0)],
            aligned: vec![Some(1.0); 3],
        };
        let svg = render_radar(&spec).unwrap();
        assert!(svg.contains(r#"data-clamped="missing,floor,ceiling""#));
    }

    #[test]
    fn too_few_axes() {
        let spec = RadarSpec {
            title: "t".into(),
            axes: vec!["a".into(), "b".into()],
            reference: vec![Some(1.0); 2],
            aligned: vec![Some(1.0); 2],
        };
        assert!(render_radar(&spec).is_err());
    }
}
