//! Minimal self-contained SVG 1.1 figures: line plots and count maps.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub colour: usize,
    pub label: String,
}

impl Series {
    pub fn new(points: Vec<(f64, f64)>, dashed: bool, colour: usize, label: &str) -> Self {
        Series { points, dashed, colour, label: label.to_string() }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, s: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="12">{xv:.3}</text>"#, y1 + 20.0);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{yv:.3}</text>"#, x0 - 8.0, py + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0, escape(xlabel));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn open() -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Polylines; dashed series are drawn with a dash pattern.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let frame = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut s = open();
    frame.axes(&mut s, title, xlabel, ylabel);
    let mut labelled = Vec::new();
    for ser in series.iter().filter(|s| !s.points.is_empty()) {
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let colour = PALETTE[ser.colour % PALETTE.len()];
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#, pts.join(" "));
        if !ser.label.is_empty() && !labelled.contains(&(&ser.label, ser.colour)) {
            labelled.push((&ser.label, ser.colour));
        }
    }
    for (i, (label, colour)) in labelled.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 120.0;
        let c = PALETTE[colour % PALETTE.len()];
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{c}" stroke-width="2"/>"#, x + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, x + 25.0, y + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

/// Cells coloured by count; `values[i][j]` sits at `(x_axis[i], y_axis[j])`.
pub fn count_map(title: &str, xlabel: &str, ylabel: &str, x_axis: &[f64], y_axis: &[f64], values: &[Vec<Option<usize>>]) -> String {
    let frame = Frame { x: range(x_axis.iter().copied()), y: range(y_axis.iter().copied()) };
    let mut s = open();
    let step = |axis: &[f64]| if axis.len() > 1 { axis[1] - axis[0] } else { 1.0 };
    let (dx, dy) = (step(x_axis), step(y_axis));
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let (x, y) = (x_axis[i], y_axis[j]);
            let (px0, px1) = (frame.px(x - dx / 2.0).max(LEFT), frame.px(x + dx / 2.0).min(WIDTH - RIGHT));
            let (py0, py1) = (frame.py(y + dy / 2.0).max(TOP), frame.py(y - dy / 2.0).min(HEIGHT - BOTTOM));
            let c = PALETTE[v % PALETTE.len()];
            let _ = writeln!(s, r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#, px1 - px0, py1 - py0);
        }
    }
    frame.axes(&mut s, title, xlabel, ylabel);
    let mut seen: Vec<usize> = values.iter().flatten().flatten().copied().collect();
    seen.sort_unstable();
    seen.dedup();
    for (k, v) in seen.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * k as f64;
        let x = WIDTH - RIGHT - 60.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}" stroke="black"/>"#, y - 10.0, PALETTE[v % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-size="12">{v}</text>"#, x + 18.0);
    }
    s.push_str("</svg>\n");
    s
}
