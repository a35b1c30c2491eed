//! Minimal SVG line plots with the plotted data embedded as a comment block.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::grid::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    /// File stem.
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn tr(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| s.points.iter().filter_map(|&(x, y)| Some((tr(x, self.log_x)?, tr(y, self.log_y)?))).collect())
            .collect();
        let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
        let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if all.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(s, "<!-- data");
        let _ = writeln!(s, "series,x,y");
        for se in &self.series {
            for &(x, y) in &se.points {
                let _ = writeln!(s, "{},{},{}", escape(&se.label), fmt(x), fmt(y));
            }
        }
        let _ = writeln!(s, "-->");
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" points="{PAD},{PAD} {PAD},{} {},{}"/>"#,
            H - PAD,
            W - PAD,
            H - PAD
        );
        for (i, v) in [x0, x1].iter().enumerate() {
            let lab = if self.log_x { format!("1e{v:.2}") } else { format!("{v:.3}") };
            let anchor = if i == 0 { "start" } else { "end" };
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{lab}</text>"#, sx(*v), H - PAD + 16.0);
        }
        for v in [y0, y1] {
            let lab = if self.log_y { format!("1e{v:.2}") } else { format!("{v:.3}") };
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{lab}</text>"#, PAD - 4.0, sy(v) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (i, (se, p)) in self.series.iter().zip(&pts).enumerate() {
            let c = COLORS[i % COLORS.len()];
            let line: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, line.join(" "));
            for &(x, y) in p {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#, sx(x), sy(y));
            }
            let ly = PAD + 16.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{c}">{}</text>"#, W - PAD - 150.0, escape(&se.label));
        }
        s.push_str("</svg>\n");
        s
    }
    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.svg", self.name));
        std::fs::write(&path, self.to_svg())?;
        Ok(path)
    }
}
