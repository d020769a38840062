use std::fmt::Write as _;
use std::io::Write;

use super::CurveExport;
use crate::error::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 44.0;

struct Frame {
    t_max: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * t / self.t_max
    }

    fn y(&self, p: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - p)
    }

    fn step_path(&self, points: impl Iterator<Item = (f64, f64)>) -> String {
        let mut d = format!("M{:.2},{:.2}", self.x(0.0), self.y(0.0));
        let mut last = 0.0;
        for (t, v) in points {
            let _ = write!(d, " H{:.2} V{:.2}", self.x(t), self.y(v));
            last = v;
        }
        let _ = write!(d, " H{:.2} V{:.2}", self.x(self.t_max), self.y(last));
        d
    }
}

/// Renders the mean (solid), the pointwise band (dotted) and an optional
/// true CDF (gray) as step functions.
pub fn write_svg<W: Write>(
    curve: &CurveExport,
    truth: Option<&[(f64, f64)]>,
    title: &str,
    mut out: W,
) -> Result<()> {
    let data_max = curve.rows.last().map_or(1.0, |r| r.t);
    let truth_max = truth.and_then(|t| t.last()).map_or(0.0, |p| p.0);
    let frame = Frame {
        t_max: data_max.max(truth_max) * 1.05,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="16" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes and ticks
    let (x0, y0) = (frame.x(0.0), frame.y(0.0));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{:.2} V{y0:.2} H{:.2}" stroke="black" fill="none"/>"#,
        frame.y(1.0),
        frame.x(frame.t_max)
    );
    for k in 0..=5 {
        let p = k as f64 / 5.0;
        let y = frame.y(p);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        );
    }
    for k in 0..=5 {
        let t = frame.t_max * k as f64 / 5.0;
        let x = frame.x(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 4.0,
            y0 + 16.0,
            super::format_sig(t, 3)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#,
        frame.x(frame.t_max / 2.0),
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">F(t)</text>"#,
        frame.y(0.5),
        frame.y(0.5)
    );

    if let Some(points) = truth {
        let mut d = String::new();
        for (i, &(t, p)) in points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2},{:.2} ", frame.x(t), frame.y(p));
        }
        let _ = writeln!(
            s,
            r#"<path class="truth" d="{}" stroke="gray" stroke-width="2" fill="none"/>"#,
            d.trim_end()
        );
    }
    for (class, pick) in [
        (
            "lower",
            (|r: &super::CurveRow| r.lower) as fn(&super::CurveRow) -> f64,
        ),
        ("upper", |r: &super::CurveRow| r.upper),
    ] {
        let d = frame.step_path(curve.rows.iter().map(|r| (r.t, pick(r))));
        let _ = writeln!(
            s,
            r#"<path class="{class}" d="{d}" stroke="black" stroke-dasharray="2,3" fill="none"/>"#
        );
    }
    let d = frame.step_path(curve.rows.iter().map(|r| (r.t, r.mean)));
    let _ = writeln!(
        s,
        r#"<path class="mean" d="{d}" stroke="black" stroke-width="1.5" fill="none"/>"#
    );
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
