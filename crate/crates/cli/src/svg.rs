//! Static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 52.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Solid,
    Dashed,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: &'static str,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64)>, style: Style, color: &'static str) -> Self {
        Series {
            name: name.to_string(),
            points,
            style,
            color,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            let pad = 0.5 * (1.0 + lo.abs());
            return Range { lo: lo - pad, hi: hi + pad };
        }
        Range { lo, hi }
    }

    /// Widened to a multiple of a 1-2-5 tick step; returns the ticks.
    fn nice(self) -> (Range, Vec<f64>) {
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|f| f * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let lo = (self.lo / step).floor() * step;
        let hi = (self.hi / step).ceil() * step;
        let n = ((hi - lo) / step).round() as usize;
        let ticks = (0..=n).map(|i| lo + i as f64 * step).collect();
        (Range { lo, hi }, ticks)
    }

    /// Whole powers of ten for a log10 axis.
    fn decades(self) -> (Range, Vec<f64>) {
        let lo = self.lo.floor();
        let hi = self.hi.ceil().max(lo + 1.0);
        let step = ((hi - lo) / 6.0).ceil().max(1.0);
        let n = ((hi - lo) / step).ceil() as usize;
        let ticks: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        (Range { lo, hi: *ticks.last().expect("non-empty") }, ticks)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One or more panels laid out side by side.
pub fn render(panels: &[Panel]) -> String {
    let total_w = WIDTH * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{HEIGHT}" viewBox="0 0 {total_w} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{total_w}" height="{HEIGHT}" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * WIDTH);
    }
    out.push_str("</svg>\n");
    out
}

fn render_panel(out: &mut String, panel: &Panel, x0: f64) {
    let ty = |v: f64| if panel.log_y { v.log10() } else { v };
    let usable = |&(x, y): &(f64, f64)| x.is_finite() && ty(y).is_finite();
    let xs = Range::of(panel.series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)).map(|p| p.0)));
    let ys = Range::of(panel.series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)).map(|p| ty(p.1))));
    let (xr, xticks) = xs.nice();
    let (yr, yticks) = if panel.log_y { ys.decades() } else { ys.nice() };
    let left = x0 + MARGIN_L;
    let right = x0 + WIDTH - MARGIN_R;
    let top = MARGIN_T;
    let bottom = HEIGHT - MARGIN_B;
    let px = |x: f64| left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left);
    let py = |y: f64| bottom - (y - yr.lo) / (yr.hi - yr.lo) * (bottom - top);

    let _ = writeln!(out, "<g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (left + right) / 2.0,
        escape(&panel.title)
    );
    for &t in &xticks {
        let x = px(t);
        let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{bottom}" x2="{x:.1}" y2="{:.1}" stroke="#000"/>"##, bottom + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_tick(t));
    }
    for &t in &yticks {
        let y = py(t);
        let label = if panel.log_y { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
        let _ = writeln!(out, r##"<line x1="{:.1}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="#000"/>"##, left - 5.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#, left - 8.0, y + 4.0);
    }
    if yr.lo < 0.0 && yr.hi > 0.0 && !panel.log_y {
        let y = py(0.0);
        let _ = writeln!(out, r##"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="#bbb" stroke-width="0.8"/>"##);
    }
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{:.1}" height="{:.1}" fill="none" stroke="#000"/>"##,
        right - left,
        bottom - top
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 14.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate({:.1} {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        x0 + 16.0,
        (top + bottom) / 2.0,
        escape(&panel.y_label)
    );

    let _ = writeln!(out, r#"<g>"#);
    for s in &panel.series {
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| usable(p)).map(|&(x, y)| (px(x), py(ty(y)))).collect();
        match s.style {
            Style::Points => {
                for (x, y) in pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.8" fill="{}" fill-opacity="0.6"/>"#, s.color);
                }
            }
            Style::Solid | Style::Dashed => {
                let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let mut d = String::new();
                for (x, y) in pts {
                    let _ = write!(d, "{x:.2},{y:.2} ");
                }
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"{dash}/>"#,
                    d.trim_end(),
                    s.color
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    // Legend, top right.
    for (i, s) in panel.series.iter().enumerate() {
        let y = top + 14.0 + 16.0 * i as f64;
        let lx = right - 150.0;
        match s.style {
            Style::Points => {
                let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"/>"#, lx + 12.0, y - 4.0, s.color);
            }
            _ => {
                let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="1.6"{dash}/>"#,
                    y - 4.0,
                    lx + 24.0,
                    y - 4.0,
                    s.color
                );
            }
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, lx + 30.0, escape(&s.name));
    }
    let _ = writeln!(out, "</g>");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let (r, t) = Range { lo: 0.03, hi: 9.7 }.nice();
        assert_eq!(r.lo, 0.0);
        assert_eq!(r.hi, 10.0);
        assert_eq!(t.len(), 6);
        let (r, _) = Range::of([2.0, 2.0].into_iter()).nice();
        assert!(r.lo < 2.0 && r.hi > 2.0);
        let (r, t) = Range { lo: -1.4, hi: -0.2 }.decades();
        assert_eq!((r.lo, r.hi), (-2.0, 0.0));
        assert_eq!(t, vec![-2.0, -1.0, 0.0]);
    }

    #[test]
    fn renders_markup() {
        let p = Panel {
            title: "a < b".into(),
            series: vec![
                Series::new("fit", vec![(0.0, 1.0), (1.0, 0.5)], Style::Dashed, "#d62728"),
                Series::new("obs", vec![(0.5, 0.7), (f64::NAN, 1.0)], Style::Points, "#888"),
            ],
            ..Default::default()
        };
        let s = render(&[p]);
        assert!(s.starts_with("<svg"));
        assert!(s.contains("stroke-dasharray"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(!s.contains("<script"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(fmt_tick(0.5), "0.5");
        assert_eq!(fmt_tick(10.0), "10");
        assert_eq!(fmt_tick(1e-6), "1e-6");
    }
}
