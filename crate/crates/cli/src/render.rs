//! ASCII and SVG boxplots.
//!
//! Both renderers map the span from `min(data, lower fence)` to
//! `max(data, upper fence)` linearly onto the canvas, so fences are always
//! visible when drawn.

use std::fmt::Write as _;

use boxfence::BoxplotStats;
use thiserror::Error;

use crate::report::fmt_sig;

pub const MIN_WIDTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Orientation {
    #[default]
    Horizontal,
    Vertical,
}

/// Layout options. `width` is in character columns for ASCII output and in
/// pixels per panel for SVG; `height` and `columns` only affect SVG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSpec {
    pub width: usize,
    pub height: usize,
    pub orientation: Orientation,
    pub show_fences: bool,
    pub columns: Option<usize>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 72,
            height: 160,
            orientation: Orientation::Horizontal,
            show_fences: true,
            columns: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("width {0} is too small (minimum {MIN_WIDTH})")]
    TooNarrow(usize),
    #[error("height {0} is too small (minimum {MIN_WIDTH})")]
    TooShort(usize),
    #[error("nothing to plot")]
    Empty,
}

/// Linear map from data values onto `[0, len]`.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    len: f64,
}

impl Scale {
    fn new(stats: &BoxplotStats<f64>, len: f64) -> Self {
        let (dmin, dmax) = stats.data_range();
        let lo = dmin.min(stats.fences.lower);
        let hi = dmax.max(stats.fences.upper);
        Scale { lo, hi, len }
    }

    fn map(&self, x: f64) -> f64 {
        if self.hi > self.lo {
            (x - self.lo) / (self.hi - self.lo) * self.len
        } else {
            self.len / 2.0
        }
    }

    fn column(&self, x: f64) -> usize {
        self.map(x).round().clamp(0.0, self.len) as usize
    }
}

/// One plot line plus an axis line with the scale endpoints.
///
/// Glyphs: `|` whisker ends, `-` whiskers, `[` `]` box edges, `=` box fill,
/// `#` median, `:` fences. Outliers are `o`; several sharing a column show
/// their count (`2`..`9`, `*` for ten or more).
pub fn render_ascii(stats: &BoxplotStats<f64>, spec: &RenderSpec) -> Result<String, RenderError> {
    if spec.width < MIN_WIDTH {
        return Err(RenderError::TooNarrow(spec.width));
    }
    let scale = Scale::new(stats, (spec.width - 1) as f64);
    let mut line = vec![' '; spec.width];
    let fill = |from: f64, to: f64, glyph: char, line: &mut Vec<char>| {
        for c in line
            .iter_mut()
            .take(scale.column(to) + 1)
            .skip(scale.column(from))
        {
            *c = glyph;
        }
    };
    if spec.show_fences {
        line[scale.column(stats.fences.lower)] = ':';
        line[scale.column(stats.fences.upper)] = ':';
    }
    let s = &stats.summary;
    fill(stats.whisker_low, stats.whisker_high, '-', &mut line);
    fill(s.q1, s.q3, '=', &mut line);
    line[scale.column(stats.whisker_low)] = '|';
    line[scale.column(stats.whisker_high)] = '|';
    line[scale.column(s.q1)] = '[';
    line[scale.column(s.q3)] = ']';
    line[scale.column(s.median)] = '#';

    let mut counts = vec![0usize; spec.width];
    for &v in &stats.outliers.values {
        counts[scale.column(v)] += 1;
    }
    for (c, &n) in line.iter_mut().zip(&counts) {
        *c = match n {
            0 => continue,
            1 => 'o',
            2..=9 => char::from_digit(n as u32, 10).expect("single digit"),
            _ => '*',
        };
    }

    let mut out: String = line.into_iter().collect();
    out.push('\n');
    let (lo, hi) = (fmt_sig(scale.lo, 4), fmt_sig(scale.hi, 4));
    let gap = spec.width.saturating_sub(lo.len() + hi.len()).max(1);
    let _ = writeln!(out, "{lo}{}{hi}", " ".repeat(gap));
    Ok(out)
}

fn coord(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

const PAD: f64 = 16.0;
const TITLE: f64 = 18.0;
const AXIS: f64 = 16.0;

/// Geometry of one panel. `along` runs on the value axis, `across` on the
/// perpendicular one; `point` turns them into SVG x/y.
struct Panel {
    orientation: Orientation,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Panel {
    fn value_len(&self) -> f64 {
        match self.orientation {
            Orientation::Horizontal => self.w - 2.0 * PAD,
            Orientation::Vertical => self.h - TITLE - AXIS - 2.0 * PAD,
        }
    }

    fn cross_len(&self) -> f64 {
        match self.orientation {
            Orientation::Horizontal => self.h - TITLE - AXIS,
            Orientation::Vertical => self.w - 2.0 * PAD,
        }
    }

    fn point(&self, along: f64, across: f64) -> (f64, f64) {
        match self.orientation {
            Orientation::Horizontal => (self.x0 + PAD + along, self.y0 + TITLE + across),
            Orientation::Vertical => (
                self.x0 + PAD + across,
                self.y0 + TITLE + PAD + self.value_len() - along,
            ),
        }
    }

    fn line(&self, out: &mut String, class: &str, a: (f64, f64), b: (f64, f64), extra: &str) {
        let (x1, y1) = self.point(a.0, a.1);
        let (x2, y2) = self.point(b.0, b.1);
        let _ = writeln!(
            out,
            r#"    <line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}"{extra}/>"#,
            coord(x1),
            coord(y1),
            coord(x2),
            coord(y2)
        );
    }

    fn rect(&self, out: &mut String, class: &str, a: (f64, f64), b: (f64, f64)) {
        let (x1, y1) = self.point(a.0, a.1);
        let (x2, y2) = self.point(b.0, b.1);
        let _ = writeln!(
            out,
            r#"    <rect class="{class}" x="{}" y="{}" width="{}" height="{}"/>"#,
            coord(x1.min(x2)),
            coord(y1.min(y2)),
            coord((x2 - x1).abs()),
            coord((y2 - y1).abs())
        );
    }
}

fn draw_panel(
    out: &mut String,
    label: &str,
    stats: &BoxplotStats<f64>,
    panel: &Panel,
    show_fences: bool,
) {
    let scale = Scale::new(stats, panel.value_len());
    let v = |x: f64| scale.map(x);
    let mid = panel.cross_len() / 2.0;
    let half = (panel.cross_len() * 0.25).max(4.0);
    let cap = half / 2.0;
    let s = &stats.summary;

    let _ = writeln!(out, r#"  <g class="panel">"#);
    let _ = writeln!(
        out,
        r#"    <text class="label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        coord(panel.x0 + panel.w / 2.0),
        coord(panel.y0 + TITLE - 5.0),
        escape(label)
    );
    if show_fences {
        for f in [stats.fences.lower, stats.fences.upper] {
            panel.line(
                out,
                "fence",
                (v(f), 0.0),
                (v(f), panel.cross_len()),
                r#" stroke-dasharray="4 3""#,
            );
        }
    }
    panel.line(
        out,
        "whisker",
        (v(stats.whisker_low), mid),
        (v(s.q1), mid),
        "",
    );
    panel.line(
        out,
        "whisker",
        (v(s.q3), mid),
        (v(stats.whisker_high), mid),
        "",
    );
    for w in [stats.whisker_low, stats.whisker_high] {
        panel.line(out, "cap", (v(w), mid - cap), (v(w), mid + cap), "");
    }
    panel.rect(out, "box", (v(s.q1), mid - half), (v(s.q3), mid + half));
    panel.line(
        out,
        "median",
        (v(s.median), mid - half),
        (v(s.median), mid + half),
        "",
    );
    for &o in &stats.outliers.values {
        let (cx, cy) = panel.point(v(o), mid);
        let _ = writeln!(
            out,
            r#"    <circle class="outlier" cx="{}" cy="{}" r="2.50"/>"#,
            coord(cx),
            coord(cy)
        );
    }
    for (x, anchor) in [(scale.lo, "start"), (scale.hi, "end")] {
        let (tx, ty) = panel.point(v(x), panel.cross_len());
        let (tx2, ty2) = panel.point(v(x), panel.cross_len() + 4.0);
        let _ = writeln!(
            out,
            r#"    <line class="tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            coord(tx),
            coord(ty),
            coord(tx2),
            coord(ty2)
        );
        let (lx, ly) = match panel.orientation {
            Orientation::Horizontal => (tx2, ty2 + 10.0),
            Orientation::Vertical => (tx2 + 2.0, ty2 + 3.0),
        };
        let anchor = match panel.orientation {
            Orientation::Horizontal => anchor,
            Orientation::Vertical => "start",
        };
        let _ = writeln!(
            out,
            r#"    <text class="tick-label" x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            coord(lx),
            coord(ly),
            escape(&fmt_sig(x, 4))
        );
    }
    let _ = writeln!(out, "  </g>");
}

/// Grid of panels, filled row by row. Defaults to at most four columns.
pub fn render_svg(
    panels: &[(String, BoxplotStats<f64>)],
    spec: &RenderSpec,
) -> Result<String, RenderError> {
    if panels.is_empty() {
        return Err(RenderError::Empty);
    }
    if spec.width < MIN_WIDTH {
        return Err(RenderError::TooNarrow(spec.width));
    }
    let min_height = MIN_WIDTH.max((TITLE + AXIS + 2.0 * PAD) as usize + 8);
    if spec.height < min_height {
        return Err(RenderError::TooShort(spec.height));
    }
    let cols = spec.columns.unwrap_or(4).clamp(1, panels.len());
    let rows = panels.len().div_ceil(cols);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let (total_w, total_h) = (w * cols as f64, h * rows as f64);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        coord(total_w),
        coord(total_h),
        coord(total_w),
        coord(total_h)
    );
    let _ = writeln!(
        out,
        "  <style>.box{{fill:#dde6f0;stroke:#234}} .median{{stroke:#c22;stroke-width:2}} \
         .whisker,.cap,.tick{{stroke:#234}} .fence{{stroke:#888}} .outlier{{fill:#c22}} \
         text{{font:10px sans-serif}}</style>"
    );
    for (i, (label, stats)) in panels.iter().enumerate() {
        let panel = Panel {
            orientation: spec.orientation,
            x0: (i % cols) as f64 * w,
            y0: (i / cols) as f64 * h,
            w,
            h,
        };
        draw_panel(&mut out, label, stats, &panel, spec.show_fences);
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
