//! Minimal static SVG renderings of the CSV artifacts. Plots are derived
//! views only; every number they show is in the corresponding CSV.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>
"#,
        WIDTH / 2.0,
        escape(title),
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 1.5, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let fx = i as f64 / 4.0;
        let x = l + fx * (r - l);
        let y = b - fx * (b - t);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, b + 16.0, tick(x0 + fx * (x1 - x0)));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 4.0, y + 4.0, tick(y0 + fx * (y1 - y0)));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of one or more series over shared axes.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>], markers_x: &[f64]) -> String {
    let xb = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yb = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 1.5, HEIGHT - MARGIN);
    let px = |x: f64| l + (x - xb.0) / (xb.1 - xb.0) * (r - l);
    let py = |y: f64| b - (y.clamp(yb.0, yb.1) - yb.0) / (yb.1 - yb.0) * (b - t);
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    axes(&mut out, xb, yb);
    for &m in markers_x {
        let x = px(m);
        let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{t}" x2="{x:.1}" y2="{b}" stroke="#888" stroke-dasharray="4 3"/>"##);
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        for (j, &(x, y)) in s.points.iter().filter(|p| p.1.is_finite()).enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let _ = writeln!(out, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.3"/>"#);
        if series.len() > 1 {
            let y = t + 14.0 + 16.0 * i as f64;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" fill="{color}">{}</text>"#, r - 6.0, escape(s.label));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `values[i][j]` over `xs[i]` × `ys[j]` (grey scale, darker is
/// larger), optionally marking points of interest.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>], marks: &[(f64, f64)]) -> String {
    let xb = bounds(xs.iter().copied());
    let yb = bounds(ys.iter().copied());
    let vb = bounds(values.iter().flatten().copied());
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 1.5, HEIGHT - MARGIN);
    let cw = (r - l) / xs.len().max(1) as f64;
    let ch = (b - t) / ys.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (255.0 * (1.0 - (v - vb.0) / (vb.1 - vb.0))).round().clamp(0.0, 255.0) as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},{shade})"/>"#,
                l + i as f64 * cw,
                b - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    axes(&mut out, xb, yb);
    for &(x, y) in marks {
        let cx = l + (x - xb.0) / (xb.1 - xb.0) * (r - l);
        let cy = b - (y - yb.0) / (yb.1 - yb.0) * (b - t);
        let _ = writeln!(out, r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="5" fill="none" stroke="red" stroke-width="2"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars over `[lo, hi)` bins.
pub fn histogram(title: &str, xlabel: &str, bins: &[(f64, f64, usize)]) -> String {
    let xb = bounds(bins.iter().flat_map(|b| [b.0, b.1]));
    let top = bins.iter().map(|b| b.2).max().unwrap_or(1).max(1) as f64;
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 1.5, HEIGHT - MARGIN);
    let px = |x: f64| l + (x - xb.0) / (xb.1 - xb.0) * (r - l);
    let mut out = String::new();
    header(&mut out, title, xlabel, "count");
    axes(&mut out, xb, (0.0, top));
    for &(lo, hi, c) in bins {
        let h = c as f64 / top * (b - t);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="#1f77b4" stroke="white"/>"##,
            px(lo),
            b - h,
            (px(hi) - px(lo)).max(0.5)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_documents() {
        let s = Series { label: "q", points: vec![(0.0, 0.1), (0.5, 1.0), (1.0, f64::NEG_INFINITY)] };
        let doc = line_plot("a <b>", "x", "y", &[s], &[0.3]);
        assert!(doc.starts_with("<svg") && doc.ends_with("</svg>\n"));
        assert!(doc.contains("a &lt;b&gt;"));
        let hm = heatmap("h", "f", "θ", &[0.0, 0.5], &[-1.0, 1.0], &[vec![0.0, 1.0], vec![0.5, 0.5]], &[(0.5, 0.0)]);
        assert_eq!(hm.matches("<rect").count(), 1 + 4 + 1);
        let hist = histogram("n", "dB", &[(-40.0, -30.0, 3), (-30.0, -20.0, 0)]);
        assert!(hist.contains("<rect"));
    }

    #[test]
    fn constant_data_does_not_divide_by_zero() {
        let s = Series { label: "flat", points: vec![(0.0, 2.0), (1.0, 2.0)] };
        assert!(!line_plot("t", "x", "y", &[s], &[]).contains("NaN"));
    }
}
