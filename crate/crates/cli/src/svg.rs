//! Minimal deterministic SVG emission: line plots with axes and a rectangular
//! heat map. No timestamps or other varying metadata; identical inputs give
//! identical bytes.

use std::fmt::Write;

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 360.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !hi.is_finite() || !lo.is_finite() || hi <= lo {
        return vec![lo];
    }
    let raw_step = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + 1e-9 * step {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

impl LinePlot {
    /// Render the panel into `out` with its top-left corner at `(0, y_off)`.
    fn render_into(&self, out: &mut String, y_off: f64) {
        let xs: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .collect();
        let ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .filter(|v| v.is_finite())
            .collect();
        let (x_lo, x_hi) = bounds(&xs);
        let (y_lo, y_hi) = bounds(&ys);
        let (y_lo, y_hi) = pad(y_lo, y_hi);

        let ax = |x: f64| {
            MARGIN_L + (x - x_lo) / (x_hi - x_lo).max(1e-300) * (PLOT_W - MARGIN_L - MARGIN_R)
        };
        let ay = |y: f64| {
            y_off + PLOT_H
                - MARGIN_B
                - (y - y_lo) / (y_hi - y_lo).max(1e-300) * (PLOT_H - MARGIN_T - MARGIN_B)
        };

        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_L}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
            y_off + MARGIN_T,
            PLOT_W - MARGIN_L - MARGIN_R,
            PLOT_H - MARGIN_T - MARGIN_B
        );
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="14" text-anchor="middle" font-family="sans-serif">{}</text>"##,
            (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
            y_off + 20.0,
            xml_escape(&self.title)
        );

        for t in nice_ticks(x_lo, x_hi, 6) {
            let x = ax(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#ccc" stroke-width="0.5"/>"##,
                y_off + MARGIN_T,
                y_off + PLOT_H - MARGIN_B
            );
            let _ = writeln!(
                out,
                r##"<text x="{x}" y="{}" font-size="11" text-anchor="middle" font-family="sans-serif">{}</text>"##,
                y_off + PLOT_H - MARGIN_B + 16.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(y_lo, y_hi, 5) {
            let y = ay(t);
            let _ = writeln!(
                out,
                r##"<line x1="{MARGIN_L}" y1="{y}" x2="{}" y2="{y}" stroke="#ccc" stroke-width="0.5"/>"##,
                PLOT_W - MARGIN_R
            );
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-size="11" text-anchor="end" font-family="sans-serif">{}</text>"##,
                MARGIN_L - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif">{}</text>"##,
            (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
            y_off + PLOT_H - 8.0,
            xml_escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="16" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 16 {})">{}</text>"##,
            y_off + PLOT_H / 2.0,
            y_off + PLOT_H / 2.0,
            xml_escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let color = SERIES_COLORS[i % SERIES_COLORS.len()];
            let mut path = String::new();
            let mut pen_down = false;
            for &(x, y) in &s.points {
                if !y.is_finite() {
                    pen_down = false;
                    continue;
                }
                let cmd = if pen_down { 'L' } else { 'M' };
                let _ = write!(path, "{}{:.2} {:.2} ", cmd, ax(x), ay(y));
                pen_down = true;
            }
            let _ = writeln!(
                out,
                r##"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"##,
                path.trim_end()
            );
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-size="11" fill="{color}" font-family="sans-serif">{}</text>"##,
                PLOT_W - MARGIN_R - 150.0,
                y_off + MARGIN_T + 16.0 + 14.0 * i as f64,
                xml_escape(&s.label)
            );
        }
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let hi = values
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-300);
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Stack panels vertically into one SVG document.
pub fn render_panels(panels: &[LinePlot]) -> String {
    let total_h = PLOT_H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{total_h}" viewBox="0 0 {PLOT_W} {total_h}">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, p) in panels.iter().enumerate() {
        p.render_into(&mut out, i as f64 * PLOT_H);
    }
    out.push_str("</svg>\n");
    out
}

/// Five-stop blue-to-yellow color ramp for heat maps.
fn ramp(t: f64) -> String {
    let stops = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let i = (t.floor() as usize).min(stops.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(stops[i].0, stops[i + 1].0),
        mix(stops[i].1, stops[i + 1].1),
        mix(stops[i].2, stops[i + 1].2)
    )
}

/// Heat map of `values[row * nx + col]` over an `nx x ny` grid.
pub fn render_heatmap(title: &str, nx: usize, ny: usize, values: &[f64]) -> String {
    assert_eq!(values.len(), nx * ny);
    let cell = (560.0 / nx as f64).min(360.0 / ny as f64);
    let w = cell * nx as f64 + 80.0;
    let h = cell * ny as f64 + 70.0;
    let (lo, hi) = bounds(values);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        out,
        r##"<text x="{}" y="20" font-size="14" text-anchor="middle" font-family="sans-serif">{}</text>"##,
        w / 2.0,
        xml_escape(title)
    );
    for row in 0..ny {
        for col in 0..nx {
            let v = values[row * nx + col];
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            let x = 40.0 + col as f64 * cell;
            // row 0 at the bottom
            let y = 30.0 + (ny - 1 - row) as f64 * cell;
            let _ = writeln!(
                out,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{}"/>"##,
                ramp(t)
            );
        }
    }
    // color bar
    let bar_x = 40.0 + nx as f64 * cell + 12.0;
    for i in 0..100 {
        let t = i as f64 / 99.0;
        let y = 30.0 + (1.0 - t) * (cell * ny as f64 - 4.0);
        let _ = writeln!(
            out,
            r##"<rect x="{bar_x:.2}" y="{y:.2}" width="10" height="{:.2}" fill="{}"/>"##,
            cell * ny as f64 / 100.0 + 1.0,
            ramp(t)
        );
    }
    out.push_str("</svg>\n");
    out
}
