//! A minimal SVG plot: histogram bars with the limit density overlaid.

use std::fmt::Write;

use cw_spectra::spectra::Histogram;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - y / self.y1 * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One `<rect>` per histogram bin and one `<polyline>` for `curve`.
pub fn render(hist: &Histogram, curve: &[(f64, f64)], title: &str) -> String {
    let (x0, x1) = hist.range();
    let peak = hist
        .bins
        .iter()
        .map(|b| b.density)
        .chain(curve.iter().map(|&(_, f)| f))
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let frame = Frame {
        x0,
        x1,
        y1: if peak > 0.0 { peak * 1.05 } else { 1.0 },
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let base = frame.py(0.0);
    for b in &hist.bins {
        let (l, r) = (frame.px(b.left), frame.px(b.right));
        let top = frame.py(b.density);
        let _ = writeln!(
            s,
            r##"<rect x="{l:.3}" y="{top:.3}" width="{:.3}" height="{:.3}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>"##,
            r - l,
            base - top
        );
    }

    let points: Vec<String> = curve
        .iter()
        .filter(|(_, f)| f.is_finite())
        .map(|&(x, f)| format!("{:.3},{:.3}", frame.px(x), frame.py(f.min(frame.y1))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        points.join(" ")
    );

    let (ax0, ax1) = (LEFT, WIDTH - RIGHT);
    let _ = writeln!(
        s,
        r#"<line x1="{ax0}" y1="{base:.3}" x2="{ax1}" y2="{base:.3}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{ax0}" y1="{TOP}" x2="{ax0}" y2="{base:.3}" stroke="black"/>"#
    );
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let xv = x0 + t * (x1 - x0);
        let px = frame.px(xv);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.3}" y1="{base:.3}" x2="{px:.3}" y2="{:.3}" stroke="black"/>"#,
            base + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.3}" y="{:.3}" text-anchor="middle">{xv:.3}</text>"#,
            base + 20.0
        );
        let yv = t * frame.y1;
        let py = frame.py(yv);
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{py:.3}" x2="{ax0}" y2="{py:.3}" stroke="black"/>"#,
            ax0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{yv:.3}</text>"#,
            ax0 - 8.0,
            py + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
