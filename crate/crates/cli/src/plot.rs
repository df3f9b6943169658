//! Self-contained SVG plots of cumulative-regret curves. No display server,
//! no dependencies: one polyline per series over linear axes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders labelled cumulative curves (one point per round, starting at t=1).
pub fn cumulative_plot_svg(title: &str, curves: &[(String, &[f64])]) -> String {
    let max_t = curves
        .iter()
        .map(|(_, ys)| ys.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let mut max_y = f64::MIN;
    let mut min_y = f64::MAX;
    for (_, ys) in curves {
        for &y in *ys {
            max_y = max_y.max(y);
            min_y = min_y.min(y);
        }
    }
    if !(min_y.is_finite() && max_y.is_finite()) {
        min_y = 0.0;
        max_y = 1.0;
    }
    min_y = min_y.min(0.0);
    if max_y <= min_y {
        max_y = min_y + 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: usize| MARGIN_LEFT + plot_w * (t as f64 - 1.0) / (max_t.max(2) as f64 - 1.0);
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - min_y) / (max_y - min_y));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"20\" font-size=\"14\">{}</text>",
        MARGIN_LEFT,
        escape(title)
    );
    // axes
    let _ = writeln!(
        svg,
        "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    // axis labels
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\">t={max_t}</text>",
        MARGIN_LEFT + plot_w - 40.0,
        MARGIN_TOP + plot_h + 20.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\">t=1</text>",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h + 20.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"5\" y=\"{:.1}\">{:.4e}</text>",
        MARGIN_TOP + 4.0,
        max_y
    );
    let _ = writeln!(
        svg,
        "  <text x=\"5\" y=\"{:.1}\">{:.4e}</text>",
        MARGIN_TOP + plot_h,
        min_y
    );

    for (k, (label, ys)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (idx, &y) in ys.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", x_of(idx + 1), y_of(y));
        }
        let _ = writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>",
            MARGIN_LEFT + plot_w - 220.0,
            MARGIN_TOP + 16.0 * (k as f64 + 1.0),
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_a_polyline_per_curve() {
        let a = [0.0, 1.0, 2.0];
        let b = [0.5, 0.5, 0.5];
        let svg = cumulative_plot_svg(
            "demo",
            &[
                ("first".to_string(), &a[..]),
                ("second".to_string(), &b[..]),
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("demo"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
