//! Minimal SVG rendering of a multiclass ROC figure: one path per class plus
//! the micro- and macro-averaged curves, over axes and a chance diagonal.

use std::fmt::Write;

use icu_core::metrics::{macro_average_curve, MulticlassAuroc};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 50.0;
const PLOT: f64 = SIZE - 2.0 * MARGIN;
const COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#111111", "#7f7f7f",
];

pub const CLASS_LABELS: [&str; 4] = ["<6 h", "6-12 h", "12-24 h", ">=24 h"];

fn to_xy((fpr, tpr): (f64, f64)) -> (f64, f64) {
    (MARGIN + fpr * PLOT, MARGIN + (1.0 - tpr) * PLOT)
}

fn path_data(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (k, &p) in points.iter().enumerate() {
        let (x, y) = to_xy(p);
        let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { " L" });
    }
    d
}

fn fmt_auc(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |a| format!("{a:.3}"))
}

/// Six `<path>` elements: classes 0-3, micro, macro. A class without both
/// positives and negatives gets an empty path and an "undefined" legend.
pub fn render_multiclass_roc(title: &str, m: &MulticlassAuroc) -> String {
    let mut curves: Vec<(String, String, String)> = Vec::with_capacity(6);
    for (k, curve) in m.class_curves.iter().enumerate() {
        let label = CLASS_LABELS.get(k).copied().unwrap_or("class");
        curves.push((
            format!("class-{k}"),
            format!(
                "class {k} ({label}) AUC {}",
                fmt_auc(curve.as_ref().map(|c| c.auc))
            ),
            curve
                .as_ref()
                .map(|c| path_data(&c.points))
                .unwrap_or_default(),
        ));
    }
    curves.push((
        "micro".into(),
        format!("micro-average AUC {}", fmt_auc(Some(m.micro_auc))),
        path_data(&m.micro_curve.points),
    ));
    let defined: Vec<_> = m.class_curves.iter().flatten().collect();
    curves.push((
        "macro".into(),
        format!("macro-average AUC {}", fmt_auc(m.macro_auc)),
        path_data(&macro_average_curve(&defined)),
    ));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>"#,
        SIZE / 2.0
    );
    let (x0, y0) = to_xy((0.0, 0.0));
    let (x1, y1) = to_xy((1.0, 1.0));
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##
    );
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (x, _) = to_xy((t, 0.0));
        let (_, y) = to_xy((0.0, t));
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-size="10">{t}</text>"#,
            y0 + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{t}</text>"#,
            x0 - 5.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">False positive rate</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">True positive rate</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for (k, (id, label, d)) in curves.iter().enumerate() {
        let dash = if id == "macro" {
            r#" stroke-dasharray="6 3""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<path data-curve="{id}" d="{d}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            COLORS[k % COLORS.len()]
        );
        let ly = y0 - 10.0 - 14.0 * (curves.len() - 1 - k) as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-size="10" fill="{}">{}</text>"#,
            x0 + PLOT * 0.42,
            COLORS[k % COLORS.len()],
            label.replace('<', "&lt;").replace('>', "&gt;")
        );
    }
    s.push_str("</svg>\n");
    s
}
