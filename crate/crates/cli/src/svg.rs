//! Self-contained SVG plots: the chart development `(u1, u2)` and, when
//! the chart has a map to ℝ³, a fixed orthographic view of the surface.

use std::fmt::Write as _;

use wagner_core::geom::{Coordinate, SurfaceChart};

const PANEL: f64 = 420.0;
const MARGIN: f64 = 44.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

pub struct Curve {
    pub label: String,
    /// Chart coordinates `(u1, u2)`.
    pub points: Vec<[f64; 2]>,
}

#[derive(Default)]
pub struct Overlay {
    /// `u2` intervals to shade.
    pub bands: Vec<(f64, f64)>,
    /// Region boundary polylines in chart coordinates.
    pub contour: Vec<Vec<[f64; 2]>>,
    /// Parallels `u2 = const` drawn dashed.
    pub parallels: Vec<f64>,
}

pub struct Figure<'a> {
    pub chart: &'a SurfaceChart,
    pub title: String,
    pub curves: Vec<Curve>,
    pub overlay: Overlay,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axis_range(c: &Coordinate, data: impl Iterator<Item = f64>) -> (f64, f64) {
    if c.periodic {
        return (c.lo, c.hi);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in data.filter(|x| x.is_finite()) {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if c.lo.is_finite() && c.hi.is_finite() {
        return (c.lo, c.hi);
    }
    if !(lo < hi) {
        return if lo.is_finite() {
            (lo - 1.0, lo + 1.0)
        } else {
            (-1.0, 1.0)
        };
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Splits a wrapped polyline where it jumps across a periodic seam.
fn wrapped_pieces(chart: &SurfaceChart, pts: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    let mut out: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    for p in pts {
        let q = [chart.u1.wrap(p[0]), chart.u2.wrap(p[1])];
        let jump = prev.is_some_and(|r| {
            [(&chart.u1, 0), (&chart.u2, 1)].iter().any(|(c, i)| {
                c.period()
                    .is_some_and(|per| (q[*i] - r[*i]).abs() > 0.5 * per)
            })
        });
        if prev.is_none() || jump {
            out.push(Vec::new());
        }
        out.last_mut().unwrap().push(q);
        prev = Some(q);
    }
    out
}

fn polyline(svg: &mut String, pts: &[[f64; 2]], style: &str) {
    if pts.len() < 2 {
        return;
    }
    svg.push_str("<polyline points=\"");
    for p in pts {
        write!(svg, "{:.2},{:.2} ", p[0], p[1]).unwrap();
    }
    writeln!(svg, "\" style=\"fill:none;{style}\"/>").unwrap();
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: (f64, f64),
    sy: (f64, f64),
}

impl Frame {
    /// Maps data `(x, y)` in `sx × sy` to the panel at `(x0, y0)`, `y` up.
    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let w = PANEL - 2.0 * MARGIN;
        [
            self.x0 + MARGIN + w * (p[0] - self.sx.0) / (self.sx.1 - self.sx.0),
            self.y0 + PANEL - MARGIN - w * (p[1] - self.sy.0) / (self.sy.1 - self.sy.0),
        ]
    }
}

fn development(svg: &mut String, fig: &Figure, x0: f64) {
    let chart = fig.chart;
    let all = || fig.curves.iter().flat_map(|c| c.points.iter());
    let fr = Frame {
        x0,
        y0: 0.0,
        sx: axis_range(&chart.u1, all().map(|p| p[0])),
        sy: axis_range(&chart.u2, all().map(|p| p[1])),
    };
    let (a, b) = (fr.map([fr.sx.0, fr.sy.0]), fr.map([fr.sx.1, fr.sy.1]));
    for &(lo, hi) in &fig.overlay.bands {
        let (p, q) = (
            fr.map([fr.sx.0, lo.max(fr.sy.0)]),
            fr.map([fr.sx.1, hi.min(fr.sy.1)]),
        );
        writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" style=\"fill:#d9d9d9;stroke:none\"/>",
            p[0],
            q[1],
            q[0] - p[0],
            p[1] - q[1]
        )
        .unwrap();
    }
    writeln!(
        svg,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" style=\"fill:none;stroke:#333\"/>",
        a[0],
        b[1],
        b[0] - a[0],
        a[1] - b[1]
    )
    .unwrap();
    for &v in &fig.overlay.parallels {
        let pts = [fr.map([fr.sx.0, v]), fr.map([fr.sx.1, v])];
        polyline(svg, &pts, "stroke:#555;stroke-dasharray:4 3;stroke-width:1");
    }
    for line in &fig.overlay.contour {
        for piece in wrapped_pieces(chart, line) {
            let pts: Vec<_> = piece.iter().map(|&p| fr.map(p)).collect();
            polyline(svg, &pts, "stroke:#777;stroke-width:2.5");
        }
    }
    for (i, c) in fig.curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for piece in wrapped_pieces(chart, &c.points) {
            let pts: Vec<_> = piece.iter().map(|&p| fr.map(p)).collect();
            polyline(svg, &pts, &format!("stroke:{color};stroke-width:1.2"));
        }
    }
    let text = |svg: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        )
        .unwrap();
    };
    text(svg, a[0], a[1] + 16.0, "start", &format!("{:.3}", fr.sx.0));
    text(svg, b[0], a[1] + 16.0, "end", &format!("{:.3}", fr.sx.1));
    text(svg, 0.5 * (a[0] + b[0]), a[1] + 30.0, "middle", "u1");
    text(svg, a[0] - 4.0, a[1], "end", &format!("{:.3}", fr.sy.0));
    text(
        svg,
        a[0] - 4.0,
        b[1] + 10.0,
        "end",
        &format!("{:.3}", fr.sy.1),
    );
    text(svg, a[0] - 24.0, 0.5 * (a[1] + b[1]), "middle", "u2");
}

/// Orthographic view from azimuth 35° and elevation 25°.
fn project(p: [f64; 3]) -> [f64; 2] {
    let (az, el) = (35f64.to_radians(), 25f64.to_radians());
    let x1 = az.cos() * p[0] - az.sin() * p[1];
    let y1 = az.sin() * p[0] + az.cos() * p[1];
    [x1, p[2] * el.cos() - y1 * el.sin()]
}

fn view3d(svg: &mut String, fig: &Figure, x0: f64) -> bool {
    let chart = fig.chart;
    let all = || fig.curves.iter().flat_map(|c| c.points.iter());
    let (a0, a1) = axis_range(&chart.u1, all().map(|p| p[0]));
    let (b0, b1) = axis_range(&chart.u2, all().map(|p| p[1]));
    let point = |u: f64, v: f64| chart.display_point(u, v).map(project);
    let Some(_) = point(0.5 * (a0 + a1), 0.5 * (b0 + b1)) else {
        return false;
    };

    const LINES: usize = 16;
    const SAMPLES: usize = 64;
    let mut mesh: Vec<Vec<[f64; 2]>> = Vec::new();
    for i in 0..=LINES {
        let s = i as f64 / LINES as f64;
        let (u, v) = (a0 + s * (a1 - a0), b0 + s * (b1 - b0));
        mesh.push(
            (0..=SAMPLES)
                .filter_map(|j| point(u, b0 + (b1 - b0) * j as f64 / SAMPLES as f64))
                .collect(),
        );
        mesh.push(
            (0..=SAMPLES)
                .filter_map(|j| point(a0 + (a1 - a0) * j as f64 / SAMPLES as f64, v))
                .collect(),
        );
    }
    let rings = |v: f64| -> Vec<[f64; 2]> {
        (0..=SAMPLES)
            .filter_map(|j| point(a0 + (a1 - a0) * j as f64 / SAMPLES as f64, v))
            .collect()
    };
    let marks: Vec<Vec<[f64; 2]>> = fig
        .overlay
        .parallels
        .iter()
        .copied()
        .chain(fig.overlay.bands.iter().flat_map(|&(lo, hi)| [lo, hi]))
        .map(rings)
        .collect();
    let curves: Vec<Vec<[f64; 2]>> = fig
        .curves
        .iter()
        .map(|c| c.points.iter().filter_map(|p| point(p[0], p[1])).collect())
        .collect();

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in mesh.iter().chain(&curves).flatten() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    // Equal scales on both axes.
    let half = 0.5 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let (cx, cy) = (0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
    let fr = Frame {
        x0,
        y0: 0.0,
        sx: (cx - half, cx + half),
        sy: (cy - half, cy + half),
    };
    for line in &mesh {
        let pts: Vec<_> = line.iter().map(|&p| fr.map(p)).collect();
        polyline(svg, &pts, "stroke:#c8c8c8;stroke-width:0.6");
    }
    for line in &marks {
        let pts: Vec<_> = line.iter().map(|&p| fr.map(p)).collect();
        polyline(svg, &pts, "stroke:#555;stroke-dasharray:4 3;stroke-width:1");
    }
    for (i, line) in curves.iter().enumerate() {
        let pts: Vec<_> = line.iter().map(|&p| fr.map(p)).collect();
        polyline(
            svg,
            &pts,
            &format!("stroke:{};stroke-width:1.2", COLORS[i % COLORS.len()]),
        );
    }
    true
}

pub fn render(fig: &Figure) -> String {
    let mut body = String::new();
    development(&mut body, fig, 0.0);
    let width = if view3d(&mut body, fig, PANEL) {
        2.0 * PANEL
    } else {
        PANEL
    };
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{h}\" viewBox=\"0 -24 {width} {h}\" \
         style=\"font-family:sans-serif;font-size:11px\">",
        h = PANEL + 24.0
    )
    .unwrap();
    writeln!(
        svg,
        "<rect x=\"0\" y=\"-24\" width=\"{width}\" height=\"{}\" style=\"fill:white\"/>",
        PANEL + 24.0
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"8\" y=\"-8\" style=\"font-size:13px\">{}</text>",
        escape(&fig.title)
    )
    .unwrap();
    svg.push_str(&body);
    for (i, c) in fig.curves.iter().enumerate() {
        let y = 4.0 + 14.0 * i as f64;
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\" style=\"fill:{}\">{}</text>",
            width - 8.0,
            COLORS[i % COLORS.len()],
            escape(&c.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
