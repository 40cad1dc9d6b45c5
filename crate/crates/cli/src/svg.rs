//! Hand-written SVG: line plots with optional log axes and a meridian heat map.
//! Coordinates are printed with fixed precision so the files are deterministic.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Markers only, no connecting line.
    pub markers: bool,
}

impl Series {
    pub fn line(name: &str, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points, markers: false }
    }

    pub fn markers(name: &str, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points, markers: true }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
}

/// Axis range padded by 5%, in plotting units (log10 for log axes).
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool, log_y: bool) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let usable = |&(x, y): &(f64, f64)| (!log_x || x > 0.0) && (!log_y || y > 0.0) && x.is_finite() && y.is_finite();
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)).map(|p| tx(p.0))));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)).map(|p| ty(p.1))));
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (ty(y) - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let sx = LEFT + f * (W - LEFT - RIGHT);
        let sy = H - BOTTOM - f * (H - TOP - BOTTOM);
        let lx = if log_x { 10f64.powf(xv) } else { xv };
        let ly = if log_y { 10f64.powf(yv) } else { yv };
        let _ = writeln!(out, "<text x=\"{sx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{lx:.3e}</text>", H - BOTTOM + 16.0);
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{ly:.3e}</text>", LEFT - 4.0, sy + 4.0);
    }
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| usable(p)).map(|&(x, y)| (px(x), py(y))).collect();
        if s.markers {
            for (x, y) in &pts {
                let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
            }
        } else if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(out, "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>", W - RIGHT - 170.0, ly - 9.0);
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{ly:.1}\">{}</text>", W - RIGHT - 155.0, escape(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

/// Diverging blue/white/red colour for v in [-1, 1].
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (1.0, 1.0 - v, 1.0 - v)
    } else {
        (1.0 + v, 1.0 + v, 1.0)
    };
    format!("#{:02x}{:02x}{:02x}", (255.0 * r).round() as u8, (255.0 * g).round() as u8, (255.0 * b).round() as u8)
}

/// Heat map of a field on the meridian half-plane s ≥ 0, |t| ≤ `extent`.
/// `value(s, t)` returns `None` outside the domain.
pub fn heat_map<F: Fn(f64, f64) -> Option<f64>>(title: &str, extent: f64, pixels: usize, value: F) -> String {
    let rows = 2 * pixels;
    let cols = pixels;
    let mut cells = Vec::with_capacity(rows * cols);
    let mut scale: f64 = 0.0;
    for r in 0..rows {
        let t = extent * (1.0 - (2 * r + 1) as f64 / rows as f64);
        for c in 0..cols {
            let s = extent * (2 * c + 1) as f64 / (2 * cols) as f64;
            let v = value(s, t);
            if let Some(x) = v {
                scale = scale.max(x.abs());
            }
            cells.push(v);
        }
    }
    let side = (H - TOP - 20.0) / rows as f64;
    let mut out = String::new();
    header(&mut out, title);
    let ox = (W - side * cols as f64) / 2.0;
    for r in 0..rows {
        for c in 0..cols {
            if let Some(v) = cells[r * cols + c] {
                let color = diverging(if scale > 0.0 { v / scale } else { 0.0 });
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
                    ox + side * c as f64,
                    TOP + side * r as f64,
                    side + 0.05,
                    side + 0.05
                );
            }
        }
    }
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">max |u| = {scale:.6e}</text>", ox + side * cols as f64 + 10.0, TOP + 20.0);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_deterministic_documents() {
        let s = [Series::line("a", vec![(0.1, 1.0), (0.2, 4.0)]), Series::markers("b", vec![(0.1, 2.0)])];
        let one = line_plot("t", "x", "y", &s, true, true);
        assert_eq!(one, line_plot("t", "x", "y", &s, true, true));
        assert!(one.starts_with("<svg") && one.trim_end().ends_with("</svg>"));
        assert!(one.contains("<polyline") && one.contains("<circle"));
    }

    #[test]
    fn non_positive_points_are_dropped_on_log_axes() {
        let s = [Series::line("a", vec![(0.0, 1.0), (1.0, -1.0), (2.0, 3.0)])];
        let out = line_plot("t", "x", "y", &s, true, true);
        assert_eq!(out.matches("points=\"").count(), 1);
        assert!(!out.contains("NaN"));
    }

    #[test]
    fn heat_map_colours_by_sign() {
        let out = heat_map("u", 1.0, 4, |s, t| if s * s + t * t <= 1.0 { Some(t) } else { None });
        assert!(out.contains("#ff0000") && out.contains("#0000ff"));
        assert_eq!(diverging(0.0), "#ffffff");
    }
}
