//! Minimal static SVG line charts with a log-scale y axis.

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Render labelled series as an SVG line chart. X is the 1-based epoch
/// index, Y is log10 of the value (non-positive values are clamped to
/// 1e-300 before taking the log).
pub(crate) fn line_chart(title: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    let max_len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let logs: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, v)| v.iter().map(|&y| y.max(1e-300).log10()).collect())
        .collect();
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &logs {
        for &y in row {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }

    // frame
    out.push_str(&format!(
        "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"black\"/>\n"
    ));

    if max_len > 0 && y_min.is_finite() {
        if (y_max - y_min).abs() < 1e-9 {
            y_min -= 0.5;
            y_max += 0.5;
        }
        let x_of = |epoch: usize| -> f64 {
            if max_len == 1 {
                MARGIN_LEFT + plot_w / 2.0
            } else {
                MARGIN_LEFT + plot_w * (epoch as f64) / (max_len as f64 - 1.0)
            }
        };
        let y_of =
            |log_y: f64| -> f64 { MARGIN_TOP + plot_h * (1.0 - (log_y - y_min) / (y_max - y_min)) };

        // y ticks at integer decades inside the range
        let lo = y_min.ceil() as i64;
        let hi = y_max.floor() as i64;
        for decade in lo..=hi {
            let y = y_of(decade as f64);
            out.push_str(&format!(
                "  <line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#dddddd\"/>\n",
                MARGIN_LEFT + plot_w
            ));
            out.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
                 text-anchor=\"end\">1e{decade}</text>\n",
                MARGIN_LEFT - 8.0,
                y + 4.0
            ));
        }

        // x ticks: up to 6 evenly spaced epochs
        let ticks = 6.min(max_len);
        for t in 0..ticks {
            let epoch = if ticks == 1 {
                0
            } else {
                t * (max_len - 1) / (ticks - 1)
            };
            let x = x_of(epoch);
            out.push_str(&format!(
                "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 6.0
            ));
            out.push_str(&format!(
                "  <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
                 text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 22.0,
                epoch + 1
            ));
        }

        for (s, ((label, _), row)) in series.iter().zip(&logs).enumerate() {
            if row.is_empty() {
                continue;
            }
            let color = PALETTE[s % PALETTE.len()];
            let mut path = String::new();
            for (e, &log_y) in row.iter().enumerate() {
                let cmd = if e == 0 { 'M' } else { 'L' };
                path.push_str(&format!("{cmd}{:.2} {:.2} ", x_of(e), y_of(log_y)));
            }
            out.push_str(&format!(
                "  <path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.trim_end()
            ));
            let ly = MARGIN_TOP + 18.0 + 18.0 * s as f64;
            out.push_str(&format!(
                "  <line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n",
                MARGIN_LEFT + plot_w - 150.0,
                MARGIN_LEFT + plot_w - 120.0
            ));
            out.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                MARGIN_LEFT + plot_w - 112.0,
                ly + 4.0,
                escape(label)
            ));
        }
    }

    out.push_str(&format!(
        "  <text x=\"20\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" \
         transform=\"rotate(-90 20 {:.2})\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));
    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">epoch</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    ));
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
