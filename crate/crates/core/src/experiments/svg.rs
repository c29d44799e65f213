//! Bare-bones deterministic SVG line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    /// Symmetric error half-widths, one per point.
    pub errors: Option<Vec<f64>>,
    pub line: bool,
}

pub struct Marker {
    pub label: String,
    pub at: (f64, f64),
    pub color: &'static str,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Use the same scale on both axes.
    pub equal_aspect: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5_f64.max(lo.abs() * 0.05) };
    (lo - pad, hi + pad)
}

impl Plot {
    pub fn render(&self, comment: &str) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.markers.iter().map(|m| m.at.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| {
                let errs = s.errors.clone().unwrap_or_else(|| vec![0.0; s.points.len()]);
                s.points
                    .iter()
                    .zip(errs)
                    .flat_map(|(p, e)| [p.1 - e, p.1 + e])
                    .collect::<Vec<_>>()
            })
            .chain(self.markers.iter().map(|m| m.at.1));
        let (mut x0, mut x1) = bounds(xs);
        let (mut y0, mut y1) = bounds(ys);
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        if self.equal_aspect {
            let scale = ((x1 - x0) / plot_w).max((y1 - y0) / plot_h);
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            x0 = cx - scale * plot_w / 2.0;
            x1 = cx + scale * plot_w / 2.0;
            y0 = cy - scale * plot_h / 2.0;
            y1 = cy + scale * plot_h / 2.0;
        }
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        // "--" is not allowed inside XML comments
        let _ = writeln!(out, "<!-- {} -->", comment.replace("--", "- -"));
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let xv = x0 + t * (x1 - x0);
            let yv = y0 + t * (y1 - y0);
            let (px, py) = (sx(xv), sy(yv));
            let bottom = MARGIN_TOP + plot_h;
            let _ = writeln!(
                out,
                r#"<line x1="{px:.1}" y1="{bottom:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                bottom + 5.0,
                bottom + 18.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{py:.1}" x2="{MARGIN_LEFT:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 5.0,
                MARGIN_LEFT - 8.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            let finite: Vec<(usize, (f64, f64))> = s
                .points
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, p)| p.0.is_finite() && p.1.is_finite())
                .collect();
            if s.line && finite.len() > 1 {
                let pts: Vec<String> = finite
                    .iter()
                    .map(|(_, (x, y))| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                    pts.join(" "),
                    s.color
                );
            }
            for (i, (x, y)) in &finite {
                if let Some(e) = s.errors.as_ref().map(|e| e[*i]) {
                    let (px, top, bot) = (sx(*x), sy(y + e), sy(y - e));
                    let _ = writeln!(
                        out,
                        r#"<line x1="{px:.2}" y1="{top:.2}" x2="{px:.2}" y2="{bot:.2}" stroke="{c}"/><line x1="{:.2}" y1="{top:.2}" x2="{:.2}" y2="{top:.2}" stroke="{c}"/><line x1="{:.2}" y1="{bot:.2}" x2="{:.2}" y2="{bot:.2}" stroke="{c}"/>"#,
                        px - 4.0,
                        px + 4.0,
                        px - 4.0,
                        px + 4.0,
                        c = s.color
                    );
                }
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    sx(*x),
                    sy(*y),
                    s.color
                );
            }
        }
        for m in &self.markers {
            let (px, py) = (sx(m.at.0), sy(m.at.1));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                px - 5.0,
                py - 5.0,
                m.color,
                px + 8.0,
                py - 8.0,
                escape(&m.label)
            );
        }
        let legend_x = WIDTH - MARGIN_RIGHT + 12.0;
        for (i, s) in self.series.iter().enumerate() {
            let y = MARGIN_TOP + 12.0 + 20.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{legend_x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="3"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
                legend_x + 20.0,
                s.color,
                legend_x + 26.0,
                y + 4.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> Plot {
        Plot {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "a".into(),
                color: PALETTE[0],
                points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NEG_INFINITY)],
                errors: Some(vec![0.1, 0.2, 0.0]),
                line: true,
            }],
            markers: vec![Marker {
                label: "object".into(),
                at: (1.0, 1.0),
                color: "black",
            }],
            equal_aspect: false,
        }
    }

    #[test]
    fn render_is_deterministic_and_escaped() {
        let a = plot().render("cfg --x");
        let b = plot().render("cfg --x");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("<!-- cfg - -x -->"));
        assert!(a.contains("t &lt;1&gt;"));
        assert!(!a.contains("inf"));
        assert!(a.trim_end().ends_with("</svg>"));
    }
}
