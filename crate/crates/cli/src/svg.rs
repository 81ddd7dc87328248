//! Minimal line-plot SVG writer.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: (f64, f64, f64, f64) = (64.0, 24.0, 24.0, 48.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 8.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

impl Plot {
    fn ty(&self, y: f64) -> f64 {
        if self.log_y {
            y.log10()
        } else {
            y
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (l, r, t, b) = MARGIN;
        let (y0, y1) = (self.ty(self.y_range.0), self.ty(self.y_range.1));
        let px = l + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - l - r);
        let py = HEIGHT - b - (self.ty(y) - y0) / (y1 - y0) * (HEIGHT - t - b);
        (px, py)
    }

    fn visible(&self, x: f64, y: f64) -> bool {
        x.is_finite()
            && y.is_finite()
            && (!self.log_y || y > 0.0)
            && (self.x_range.0..=self.x_range.1).contains(&x)
            && (self.y_range.0..=self.y_range.1).contains(&y)
    }

    /// Polylines are broken where a series leaves the plotting window.
    pub fn render(&self) -> String {
        let (l, r, t, b) = MARGIN;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - l - r,
            HEIGHT - t - b
        );
        for x in ticks(self.x_range.0, self.x_range.1) {
            let (px, _) = self.map(x, self.y_range.0);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{0}" x2="{px:.2}" y2="{1}" stroke="black"/><text x="{px:.2}" y="{2}" text-anchor="middle">{x}</text>"#,
                HEIGHT - b,
                HEIGHT - b + 5.0,
                HEIGHT - b + 18.0
            );
        }
        let (ty0, ty1) = (self.ty(self.y_range.0), self.ty(self.y_range.1));
        for v in ticks(ty0, ty1) {
            let y = if self.log_y { 10f64.powf(v) } else { v };
            let (_, py) = self.map(self.x_range.0, y);
            let label = if self.log_y { format!("1e{v}") } else { format!("{v}") };
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{label}</text>"#,
                l - 5.0,
                l - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{0}" y="{1}" text-anchor="middle">{2}</text>"#,
            l + 0.5 * (WIDTH - l - r),
            HEIGHT - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
            t + 0.5 * (HEIGHT - t - b),
            escape(&self.y_label)
        );
        let _ = writeln!(s, r#"<text x="{0}" y="16" text-anchor="middle">{1}</text>"#, WIDTH / 2.0, escape(&self.title));
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, s: &mut String| {
                if run.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                        run.join(" ")
                    );
                }
                run.clear();
            };
            for &(x, y) in &series.points {
                if self.visible(x, y) {
                    let (px, py) = self.map(x, y);
                    run.push(format!("{px:.2},{py:.2}"));
                } else {
                    flush(&mut run, &mut s);
                }
            }
            flush(&mut run, &mut s);
            let ly = t + 18.0 + 18.0 * i as f64;
            let lx = WIDTH - r - 230.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{0}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{1}" y="{2}">{3}</text>"#,
                lx + 24.0,
                lx + 30.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        assert_eq!(ticks(0.0, 3.0), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        let t = ticks(-2.0, 7.3);
        assert!(t[0] >= -2.0 && *t.last().unwrap() <= 7.3);
    }

    #[test]
    fn clipped_series_splits_polyline() {
        let plot = Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x_range: (0.0, 4.0),
            y_range: (0.0, 1.0),
            log_y: false,
            series: vec![Series {
                label: "a<b".into(),
                points: vec![(0.0, 0.1), (1.0, 0.2), (2.0, 5.0), (3.0, 0.3), (4.0, 0.4)],
            }],
        };
        let svg = plot.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
