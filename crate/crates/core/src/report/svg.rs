//! Static SVG plots: a gain heatmap and a scatter of linear-probe gain
//! against average gain.

use std::fmt::Write;

use crate::fixtures::LinearCoefficients;
use crate::gain::{GainMatrix, SignificanceRule};

const CELL: f64 = 28.0;
const LABEL_MARGIN: f64 = 120.0;
const MISSING_FILL: &str = "#d9d9d9";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Diverging blue-white-red color for `v` on `[-scale, scale]`.
pub fn diverging_color(v: f64, scale: f64) -> String {
    let x = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |full: f64| (255.0 - (255.0 - full) * x.abs()).round() as u8;
    let (r, g, b) = if x >= 0.0 {
        (fade(178.0), fade(24.0), fade(43.0))
    } else {
        (fade(33.0), fade(102.0), fade(172.0))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// One `rect.cell` per (model, target) in row-major order. Every cell
/// carries `data-significant`; significant cells also get an italic value
/// label.
pub fn emit_heatmap(g: &GainMatrix, rule: SignificanceRule) -> String {
    let (nm, nt) = (g.n_models(), g.n_targets());
    let scale = g
        .cells()
        .iter()
        .flatten()
        .map(|c| c.mean.abs())
        .fold(0.0, f64::max);
    let width = LABEL_MARGIN + CELL * nt as f64 + 10.0;
    let height = LABEL_MARGIN + CELL * nm as f64 + 10.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    )
    .unwrap();
    writeln!(s, r#"<title>Gain over baseline (rows: models, columns: targets)</title>"#).unwrap();
    for (j, id) in g.target_ids().iter().enumerate() {
        let x = LABEL_MARGIN + CELL * (j as f64 + 0.5);
        writeln!(
            s,
            r#"<text class="col-label" x="{x}" y="{y}" transform="rotate(-60 {x} {y})">{}</text>"#,
            escape(id),
            y = LABEL_MARGIN - 6.0
        )
        .unwrap();
    }
    for (i, id) in g.model_ids().iter().enumerate() {
        let y = LABEL_MARGIN + CELL * (i as f64 + 0.5) + 3.0;
        writeln!(
            s,
            r#"<text class="row-label" x="{x}" y="{y}" text-anchor="end">{}</text>"#,
            escape(id),
            x = LABEL_MARGIN - 6.0
        )
        .unwrap();
    }
    for i in 0..nm {
        for j in 0..nt {
            let (x, y) = (LABEL_MARGIN + CELL * j as f64, LABEL_MARGIN + CELL * i as f64);
            let model = escape(&g.model_ids()[i]);
            let target = escape(&g.target_ids()[j]);
            match g.cell(i, j) {
                Some(c) => {
                    let sig = g.is_significant(i, j, rule);
                    writeln!(
                        s,
                        r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" data-model="{model}" data-target="{target}" data-gain="{:.4}" data-significant="{sig}"><title>{model} → {target}: {:.2}</title></rect>"#,
                        diverging_color(c.mean, scale),
                        c.mean,
                        c.mean
                    )
                    .unwrap();
                    if sig {
                        writeln!(
                            s,
                            r#"<text class="sig-label" x="{}" y="{}" text-anchor="middle" font-style="italic">{:.1}</text>"#,
                            x + CELL / 2.0,
                            y + CELL / 2.0 + 3.0,
                            c.mean
                        )
                        .unwrap();
                    }
                }
                None => writeln!(
                    s,
                    r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{MISSING_FILL}" data-model="{model}" data-target="{target}" data-missing="true" data-significant="false"/>"#
                )
                .unwrap(),
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter of `(id, x, y)` points with an optional line `y = slope x +
/// intercept`.
pub fn emit_scatter(
    points: &[(String, f64, f64)],
    x_label: &str,
    y_label: &str,
    line: Option<&LinearCoefficients>,
) -> String {
    let (w, h, pad) = (480.0, 360.0, 50.0);
    let range = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 1.0, hi + 1.0)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(points.iter().map(|p| p.1).collect());
    let (y0, y1) = range(points.iter().map(|p| p.2).collect());
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        w - 2.0 * pad,
        h - 2.0 * pad
    )
    .unwrap();
    writeln!(s, r#"<text class="x-label" x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 12.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text class="y-label" x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    )
    .unwrap();
    if let Some(c) = line {
        let (ya, yb) = (c.slope * x0 + c.intercept, c.slope * x1 + c.intercept);
        writeln!(
            s,
            r##"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#b2182b" stroke-dasharray="4 3"/>"##,
            px(x0),
            py(ya).clamp(0.0, h),
            px(x1),
            py(yb).clamp(0.0, h)
        )
        .unwrap();
    }
    for (id, x, y) in points {
        writeln!(
            s,
            r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="3.5" fill="#2166ac" data-id="{}"><title>{}: ({x:.2}, {y:.2})</title></circle>"##,
            px(*x),
            py(*y),
            escape(id),
            escape(id)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colors_are_centered() {
        assert_eq!(diverging_color(0.0, 3.0), "#ffffff");
        assert_eq!(diverging_color(3.0, 3.0), "#b2182b");
        assert_eq!(diverging_color(-9.0, 3.0), "#2166ac");
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape(r#"a<b>&"c'"#), "a&lt;b&gt;&amp;&quot;c&apos;");
    }

    #[test]
    fn one_by_one() {
        let g = GainMatrix::from_dense(&["m"], &["t"], &[vec![0.5]]).unwrap();
        let svg = emit_heatmap(&g, SignificanceRule::Std);
        assert_eq!(svg.matches(r#"class="cell""#).count(), 1);
    }
}
