//! Headless SVG scatter plots of the energy-value correlation.
//!
//! Output is plain SVG 1.1 built from primitives, deterministic for a
//! given input, with the plotted points also exportable as CSV.

use std::fmt::Write as _;

use crate::dataset::GibbsClass;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 58.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub symbol: String,
    /// Energy coordinate, kJ/mol.
    pub x: f64,
    /// log10 price, 1992 USD per mole.
    pub y: f64,
    pub class: GibbsClass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<PlotPoint>,
    pub fit_line: Option<FitLine>,
    /// Shown top-left inside the plot area (e.g. the correlation).
    pub annotation: Option<String>,
    /// Colour points by Gibbs class and draw a legend.
    pub color_by_class: bool,
}

fn class_color(class: GibbsClass) -> &'static str {
    match class {
        GibbsClass::High => "#d62728",
        GibbsClass::Mid => "#2ca02c",
        GibbsClass::Low => "#1f77b4",
    }
}

/// Tick positions covering [lo, hi] at a 1/2/5 step.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        // avoid "-0"
        out.push(if t == 0.0 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl ScatterPlot {
    pub fn to_svg(&self) -> String {
        let (mut x_lo, mut x_hi) = bounds(self.points.iter().map(|p| p.x));
        let (mut y_lo, mut y_hi) = bounds(self.points.iter().map(|p| p.y));
        // 5% padding so extreme points stay inside the frame
        let xpad = 0.05 * (x_hi - x_lo).max(1e-9);
        let ypad = 0.05 * (y_hi - y_lo).max(1e-9);
        x_lo -= xpad;
        x_hi += xpad;
        y_lo -= ypad;
        y_hi += ypad;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );

        // frame
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        );

        // axis ticks and grid
        for t in ticks(x_lo, x_hi) {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                MARGIN_TOP + plot_h + 18.0,
                fmt_tick(t)
            );
        }
        for t in ticks(y_lo, y_hi) {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="1"/>"#,
                MARGIN_LEFT - 5.0,
                MARGIN_LEFT
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }

        // axis labels
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 14.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            esc(&self.y_label)
        );

        // fit line clipped to the data box
        if let Some(line) = self.fit_line {
            if let Some(((xa, ya), (xb, yb))) = clip_line(line, x_lo, x_hi, y_lo, y_hi) {
                let _ = writeln!(
                    svg,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-width="1.5" stroke-dasharray="6 3"/>"##,
                    sx(xa),
                    sy(ya),
                    sx(xb),
                    sy(yb)
                );
            }
        }

        // points with symbol labels
        for p in &self.points {
            let color = if self.color_by_class {
                class_color(p.class)
            } else {
                "#1f77b4"
            };
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.2" fill="{color}" fill-opacity="0.85"/>"#,
                sx(p.x),
                sy(p.y)
            );
            let _ = writeln!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="9" fill="#333">{}</text>"##,
                sx(p.x) + 4.5,
                sy(p.y) - 3.5,
                esc(&p.symbol)
            );
        }

        if let Some(note) = &self.annotation {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
                MARGIN_LEFT + 12.0,
                MARGIN_TOP + 20.0,
                esc(note)
            );
        }

        if self.color_by_class {
            let classes = [GibbsClass::High, GibbsClass::Mid, GibbsClass::Low];
            for (i, class) in classes.iter().enumerate() {
                let y = MARGIN_TOP + 40.0 + 18.0 * i as f64;
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}"/>"#,
                    MARGIN_LEFT + 18.0,
                    y - 4.0,
                    class_color(*class)
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">ΔG° {}</text>"#,
                    MARGIN_LEFT + 28.0,
                    y,
                    class.as_str()
                );
            }
        }

        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Intersection of `y = slope·x + intercept` with the data box, if any.
fn clip_line(
    line: FitLine,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
) -> Option<((f64, f64), (f64, f64))> {
    let y_at = |x: f64| line.slope * x + line.intercept;
    if line.slope == 0.0 {
        if line.intercept < y_lo || line.intercept > y_hi {
            return None;
        }
        return Some(((x_lo, line.intercept), (x_hi, line.intercept)));
    }
    let x_at = |y: f64| (y - line.intercept) / line.slope;
    let mut candidates = Vec::new();
    for x in [x_lo, x_hi] {
        let y = y_at(x);
        if (y_lo..=y_hi).contains(&y) {
            candidates.push((x, y));
        }
    }
    for y in [y_lo, y_hi] {
        let x = x_at(y);
        if (x_lo..=x_hi).contains(&x) {
            candidates.push((x, y));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if candidates.len() >= 2 {
        Some((candidates[0], candidates[candidates.len() - 1]))
    } else {
        None
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `symbol,energy_kj_mol,log10_price_1992usd_mol,gibbs_class` rows.
pub fn points_to_csv(points: &[PlotPoint]) -> String {
    let mut out = String::from("symbol,energy_kj_mol,log10_price_1992usd_mol,gibbs_class\n");
    for p in points {
        out.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            p.symbol,
            p.x,
            p.y,
            p.class.as_str()
        ));
    }
    out
}
