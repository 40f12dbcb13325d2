//! Static SVG line, step and scatter plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Step,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    /// Also used as the element id.
    pub name: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        } else if !log {
            let pad = 0.03 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Some(Self { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 6 + 1).max(1);
            return (a..=b)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect();
        }
        (0..=5)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                (v, format!("{v:.3}"))
            })
            .collect()
    }
}

impl Plot {
    fn usable(&self, p: (f64, f64)) -> bool {
        p.0.is_finite()
            && p.1.is_finite()
            && (!self.log_x || p.0 > 0.0)
            && (!self.log_y || p.1 > 0.0)
    }

    /// `None` when no series has a plottable point.
    pub fn render(&self) -> Option<String> {
        let pts = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter().copied())
                .filter(|&p| self.usable(p))
        };
        let xa = Axis::fit(pts().map(|p| p.0), self.log_x)?;
        let ya = Axis::fit(pts().map(|p| p.1), self.log_y)?;
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + xa.frac(x) * pw;
        let sy = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
        );
        for (v, label) in xa.ticks() {
            let x = sx(v);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#444"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"##,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 20.0
            );
        }
        for (v, label) in ya.ticks() {
            let y = sy(v);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let p: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|&p| self.usable(p))
                .map(|(x, y)| (sx(x), sy(y)))
                .collect();
            let id = slug(&s.name);
            match s.style {
                Style::Points => {
                    let _ = writeln!(out, r#"<g id="{id}" fill="{color}">"#);
                    for (x, y) in &p {
                        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
                    }
                    let _ = writeln!(out, "</g>");
                }
                Style::Line | Style::Step => {
                    let mut d = String::new();
                    for (i, (x, y)) in p.iter().enumerate() {
                        if i == 0 {
                            let _ = write!(d, "M{x:.2},{y:.2}");
                        } else if s.style == Style::Step {
                            let _ = write!(d, " H{x:.2} V{y:.2}");
                        } else {
                            let _ = write!(d, " L{x:.2},{y:.2}");
                        }
                    }
                    let _ = writeln!(
                        out,
                        r#"<path id="{id}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
                    );
                }
            }
            let ly = TOP + 18.0 + 18.0 * k as f64;
            let lx = LEFT + pw - 170.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{ly}">{}</text>"#,
                ly - 10.0,
                lx + 18.0,
                escape(&s.name)
            );
        }
        for (i, note) in self.notes.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text class="note" x="{}" y="{}">{}</text>"#,
                LEFT + 10.0,
                TOP + ph - 12.0 - 16.0 * i as f64,
                escape(note)
            );
        }
        out.push_str("</svg>\n");
        Some(out)
    }
}
