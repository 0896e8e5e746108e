//! Minimal self-contained SVG line charts.

use std::fmt::Write;

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

impl Chart<'_> {
    /// Points with non-finite coordinates (or nonpositive ones on a log axis)
    /// are dropped.
    pub fn render(&self, points: &[(f64, f64)]) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
            .map(|&(x, y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(self.title)).unwrap();
        let (x0, y0, x1, y1) = (LEFT, TOP, W - RIGHT, H - BOTTOM);
        writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0)
            .unwrap();
        let xl = if self.log_x { format!("log10 {}", self.x_label) } else { self.x_label.to_string() };
        let yl = if self.log_y { format!("log10 {}", self.y_label) } else { self.y_label.to_string() };
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 15.0, esc(&xl)).unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(&yl)
        )
        .unwrap();

        if pts.is_empty() {
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, (x0 + x1) / 2.0, (y0 + y1) / 2.0)
                .unwrap();
            s.push_str("</svg>\n");
            return s;
        }
        let (mut ax, mut bx) = range(pts.iter().map(|p| p.0));
        let (mut ay, mut by) = range(pts.iter().map(|p| p.1));
        pad(&mut ax, &mut bx);
        pad(&mut ay, &mut by);
        let px = |x: f64| x0 + (x - ax) / (bx - ax) * (x1 - x0);
        let py = |y: f64| y1 - (y - ay) / (by - ay) * (y1 - y0);

        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (vx, vy) = (ax + f * (bx - ax), ay + f * (by - ay));
            writeln!(s, r#"<line x1="{0}" y1="{y1}" x2="{0}" y2="{1}" stroke="black"/>"#, px(vx), y1 + 5.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(vx), y1 + 20.0, tick(vx)).unwrap();
            writeln!(s, r#"<line x1="{}" y1="{1}" x2="{x0}" y2="{1}" stroke="black"/>"#, x0 - 5.0, py(vy)).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 8.0, py(vy) + 4.0, tick(vy)).unwrap();
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path.join(" ")).unwrap();
        for &(x, y) in &pts {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, px(x), py(y)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn pad(a: &mut f64, b: &mut f64) {
    let w = *b - *a;
    let m = if w > 0.0 { 0.05 * w } else { 0.5 * a.abs().max(1e-12) };
    *a -= m;
    *b += m;
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
