//! Self-contained SVG panel of density snapshots with an analytic overlay.

use std::fmt::Write;

pub struct Curve {
    pub t: f64,
    pub label: String,
    pub peak_x: f64,
    pub integral: f64,
    pub xs: Vec<f64>,
    pub numeric: Vec<f64>,
    pub analytic: Vec<f64>,
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 9] = [
    "#1b3a6b", "#2b5c9e", "#3f7fbf", "#4fa3a5", "#5fb873", "#a3c94f", "#e0b13a", "#e07b2e", "#c23b22",
];

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - y / self.y_hi * (HEIGHT - TOP - BOTTOM)
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

fn polyline(frame: &Frame, xs: &[f64], ys: &[f64]) -> String {
    let mut s = String::new();
    for (x, y) in xs.iter().zip(ys) {
        if *x < frame.x_lo || *x > frame.x_hi {
            continue;
        }
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", frame.px(*x), frame.py(*y));
    }
    s
}

/// Renders `curves` over `[x_lo, x_hi]`.
pub fn render(title: &str, curves: &[Curve], x_lo: f64, x_hi: f64) -> String {
    let y_max = curves
        .iter()
        .flat_map(|c| c.numeric.iter().chain(&c.analytic))
        .fold(0.0f64, |a, b| a.max(*b));
    let frame = Frame {
        x_lo,
        x_hi,
        y_hi: if y_max > 0.0 { 1.08 * y_max } else { 1.0 },
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );

    // axes and ticks
    let (x0, x1) = (frame.px(x_lo), frame.px(x_hi));
    let (y0, y1) = (frame.py(0.0), frame.py(frame.y_hi));
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    let xs = nice_step(x_hi - x_lo, 8);
    let mut tick = (x_lo / xs).ceil() * xs;
    while tick <= x_hi + 1e-9 * xs {
        let p = frame.px(tick);
        let _ = writeln!(
            s,
            r#"<line x1="{p:.2}" y1="{y0:.2}" x2="{p:.2}" y2="{:.2}" stroke="black"/><text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            tick_label(tick)
        );
        tick += xs;
    }
    let ys = nice_step(frame.y_hi, 5);
    let mut tick = 0.0;
    while tick <= frame.y_hi {
        let p = frame.py(tick);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{p:.2}" x2="{x0:.2}" y2="{p:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            p + 4.0,
            tick_label(tick)
        );
        tick += ys;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">x</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">&#961;(x, t)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<g class="snapshot" data-t="{:.16e}" data-peak-x="{:.16e}" data-integral="{:.16e}">"#,
            c.t, c.peak_x, c.integral
        );
        let _ = writeln!(
            s,
            r#"<polyline class="numeric" fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            polyline(&frame, &c.xs, &c.numeric)
        );
        let _ = writeln!(
            s,
            r#"<polyline class="analytic" fill="none" stroke="black" stroke-width="0.9" stroke-dasharray="4 3" points="{}"/>"#,
            polyline(&frame, &c.xs, &c.analytic)
        );
        let ly = TOP + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&c.label)
        );
        let _ = writeln!(s, "</g>");
    }
    let ly = TOP + 18.0 * curves.len() as f64 + 6.0;
    let lx = WIDTH - RIGHT + 20.0;
    let _ = writeln!(
        s,
        r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="black" stroke-dasharray="4 3"/><text x="{:.1}" y="{:.1}">closed form</text>"#,
        lx + 22.0,
        lx + 28.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
