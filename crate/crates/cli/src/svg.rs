//! Standalone SVG heatmaps and bar charts. Output depends only on the input
//! values, so identical inputs give identical bytes.

use std::fmt::Write as _;

use anyhow::{bail, Result};

const NEG: [f64; 3] = [33.0, 102.0, 172.0];
const MID: [f64; 3] = [247.0, 247.0, 247.0];
const POS: [f64; 3] = [178.0, 24.0, 43.0];
const SEQ_LO: [f64; 3] = [255.0, 247.0, 236.0];
const SEQ_HI: [f64; 3] = [127.0, 0.0, 0.0];

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [u8; 3] {
    let c = |k: usize| (a[k] + (b[k] - a[k]) * t).round().clamp(0.0, 255.0) as u8;
    [c(0), c(1), c(2)]
}

/// Diverging palette over `t` in [-1, 1]; `t = 0` is exactly the midpoint
/// color and `-t` sits at the mirrored position on the opposite arm.
pub fn diverging_color(t: f64) -> [u8; 3] {
    let t = t.clamp(-1.0, 1.0);
    if t >= 0.0 {
        lerp(MID, POS, t)
    } else {
        lerp(MID, NEG, -t)
    }
}

pub const DIVERGING_MID: [u8; 3] = [247, 247, 247];

/// Sequential palette over `t` in [0, 1].
pub fn sequential_color(t: f64) -> [u8; 3] {
    lerp(SEQ_LO, SEQ_HI, t.clamp(0.0, 1.0))
}

pub fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn check_finite(values: &[f64]) -> Result<()> {
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        bail!("cannot render non-finite value {} at index {k}", values[k]);
    }
    Ok(())
}

/// A row-major matrix with labels, e.g. electrodes × timesteps.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub row_labels: &'a [String],
    pub col_labels: &'a [String],
    pub values: &'a [f64],
    /// Diverging palette centered at 0 when set, sequential otherwise.
    pub signed: bool,
}

const CELL: usize = 14;
const LEFT: usize = 64;
const TOP: usize = 36;
const LEGEND_STEPS: usize = 21;

fn fmt_value(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn heatmap_svg(h: &Heatmap) -> Result<String> {
    let (rows, cols) = (h.row_labels.len(), h.col_labels.len());
    if rows == 0 || cols == 0 || h.values.len() != rows * cols {
        bail!("heatmap of {} values does not match {rows} row and {cols} column labels", h.values.len());
    }
    check_finite(h.values)?;

    let (lo, hi) = if h.signed {
        let m = h.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (-m, m)
    } else {
        let lo = h.values.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let hi = h.values.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        (lo, hi)
    };
    let color = |v: f64| -> [u8; 3] {
        if h.signed {
            if hi > 0.0 { diverging_color(v / hi) } else { DIVERGING_MID }
        } else if hi > lo {
            sequential_color((v - lo) / (hi - lo))
        } else {
            sequential_color(0.0)
        }
    };

    let grid_w = cols * CELL;
    let grid_h = rows * CELL;
    let legend_x = LEFT + grid_w + 24;
    let width = legend_x + 90;
    let height = TOP + grid_h + 48;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"10\">"
    );
    let _ = writeln!(s, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    let _ = writeln!(s, "<text x=\"{LEFT}\" y=\"20\" font-size=\"13\">{}</text>", escape(h.title));
    let _ = writeln!(s, "<g class=\"cells\">");
    for r in 0..rows {
        for c in 0..cols {
            let v = h.values[r * cols + c];
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\"><title>{} {}: {}</title></rect>",
                LEFT + c * CELL,
                TOP + r * CELL,
                hex(color(v)),
                escape(&h.row_labels[r]),
                escape(&h.col_labels[c]),
                fmt_value(v)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    for (r, label) in h.row_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            LEFT - 4,
            TOP + r * CELL + CELL - 3,
            escape(label)
        );
    }
    // Label every column when there is room, otherwise every fourth.
    let every = if cols <= 40 { 1 } else { 4 };
    for (c, label) in h.col_labels.iter().enumerate().filter(|(c, _)| c % every == 0) {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"8\">{}</text>",
            LEFT + c * CELL + CELL / 2,
            TOP + grid_h + 12,
            escape(label)
        );
    }

    let _ = writeln!(s, "<g class=\"legend\">");
    let step_h = grid_h.max(LEGEND_STEPS * 4) / LEGEND_STEPS;
    for k in 0..LEGEND_STEPS {
        // Top of the legend is the maximum.
        let frac = 1.0 - k as f64 / (LEGEND_STEPS - 1) as f64;
        let rgb = if h.signed { diverging_color(2.0 * frac - 1.0) } else { sequential_color(frac) };
        let _ = writeln!(
            s,
            "<rect x=\"{legend_x}\" y=\"{}\" width=\"14\" height=\"{step_h}\" fill=\"{}\"/>",
            TOP + k * step_h,
            hex(rgb)
        );
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text>", legend_x + 18, TOP + 8, fmt_value(hi));
    if h.signed {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">0</text>",
            legend_x + 18,
            TOP + (LEGEND_STEPS / 2) * step_h + step_h / 2 + 3
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\">{}</text>",
        legend_x + 18,
        TOP + LEGEND_STEPS * step_h,
        fmt_value(lo)
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

/// Vertical bars from a zero baseline; negative values hang below it.
pub fn bar_chart_svg(title: &str, labels: &[String], values: &[f64], y_label: &str) -> Result<String> {
    if labels.len() != values.len() || values.is_empty() {
        bail!("bar chart needs one label per value");
    }
    check_finite(values)?;
    const BAR: usize = 18;
    const PLOT_H: f64 = 200.0;
    let hi = values.iter().copied().fold(0.0f64, f64::max);
    let lo = values.iter().copied().fold(0.0f64, f64::min);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let y_of = |v: f64| TOP as f64 + (hi - v) / span * PLOT_H;
    let base = y_of(0.0);
    let width = LEFT + values.len() * BAR + 20;
    let height = TOP + PLOT_H as usize + 50;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"10\">"
    );
    let _ = writeln!(s, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    let _ = writeln!(s, "<text x=\"{LEFT}\" y=\"20\" font-size=\"13\">{}</text>", escape(title));
    let _ = writeln!(
        s,
        "<text x=\"12\" y=\"{}\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{}</text>",
        TOP + 100,
        TOP + 100,
        escape(y_label)
    );
    let _ = writeln!(s, "<g class=\"bars\">");
    for (k, (&v, label)) in values.iter().zip(labels).enumerate() {
        let y = y_of(v);
        let (top, h) = if v >= 0.0 { (y, base - y) } else { (base, y - base) };
        let fill = if v >= 0.0 { hex(lerp(MID, POS, 0.85)) } else { hex(lerp(MID, NEG, 0.85)) };
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{top:.2}\" width=\"{}\" height=\"{h:.2}\" fill=\"{fill}\"><title>{}: {}</title></rect>",
            LEFT + k * BAR + 2,
            BAR - 4,
            escape(label),
            fmt_value(v)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{base:.2}\" x2=\"{}\" y2=\"{base:.2}\" stroke=\"#333333\"/>",
        LEFT + values.len() * BAR
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", LEFT - 4, TOP + 4, fmt_value(hi));
    let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", LEFT - 4, y_of(lo), fmt_value(lo));
    for (k, label) in labels.iter().enumerate() {
        let x = LEFT + k * BAR + BAR / 2;
        let y = TOP + PLOT_H as usize + 10;
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{y}\" transform=\"rotate(60 {x} {y})\" font-size=\"8\">{}</text>",
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
