//! Self-contained SVG line charts of the diagnostic columns against
//! `log10 R`. Output is plain text with fixed-precision coordinates, so
//! identical series render to identical bytes.

use expball::diagnostics::{DiagnosticRecord, RecordField};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

const SERIES: &[(RecordField, &str)] = &[
    (RecordField::DevUSup, "#1f77b4"),
    (RecordField::DevGradSup, "#ff7f0e"),
    (RecordField::DtphiSup, "#2ca02c"),
    (RecordField::EnergyE, "#d62728"),
    (RecordField::CumSpacetime, "#9467bd"),
    (RecordField::C2FloorRatio, "#8c564b"),
    (RecordField::RhoRatioMin, "#e377c2"),
    (RecordField::RhoRatioMax, "#7f7f7f"),
];

/// Render the standard diagnostic chart: `log10` of each positive column
/// against `log10 R`. Columns without positive samples are dropped.
pub fn render_series(records: &[DiagnosticRecord]) -> String {
    let mut curves: Vec<(&'static str, &'static str, Vec<(f64, f64)>)> = Vec::new();
    for (field, color) in SERIES {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| field.get(r) > 0.0 && r.radius > 0.0)
            .map(|r| (r.radius.log10(), field.get(r).log10()))
            .collect();
        if pts.len() >= 2 {
            curves.push((field.name(), color, pts));
        }
    }

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if curves.is_empty() {
        svg.push_str(
            "<text x=\"40\" y=\"60\" font-family=\"monospace\" font-size=\"14\">no positive series to plot</text>\n",
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, _, pts) in &curves {
        for &(x, y) in pts {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h,
        )
    };

    // Frame and axis labels.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">log10 R</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    for (frac, value) in [(0.0, x_min), (1.0, x_max)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{value:.2}</text>\n",
            MARGIN_L + frac * plot_w,
            HEIGHT - MARGIN_B + 16.0
        ));
    }
    for (frac, value) in [(0.0, y_max), (1.0, y_min)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{value:.2}</text>\n",
            MARGIN_L - 6.0,
            MARGIN_T + frac * plot_h + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">log10 value</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));

    for (idx, (name, color, pts)) in curves.iter().enumerate() {
        let mut path = String::new();
        for (k, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = to_px(x, y);
            path.push_str(if k == 0 { "M" } else { "L" });
            path.push_str(&format!("{px:.2},{py:.2} "));
        }
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.trim_end()
        ));
        let ly = MARGIN_T + 16.0 + idx as f64 * 18.0;
        let lx = WIDTH - MARGIN_R + 14.0;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"monospace\" font-size=\"12\">{name}</text>\n",
            lx + 24.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
