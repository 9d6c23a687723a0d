//! Static SVG figures: 2-D scenes with constraint geometry, loss curves,
//! and per-axis panels for higher-dimensional traces.

use std::fmt::Write;

use crate::ltl::{Atom, Cmp, Formula, Term, Trace};
use crate::training::EpochMetrics;

const DEMO_COLOR: &str = "#ff7f0e";
const LEARNED_COLOR: &str = "#1f77b4";
const MARK_COLOR: &str = "#d62728";
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Constraint geometry read off a formula's atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Geometry {
    /// `(object, radius)` from `sqnorm(p - oK) >= r`.
    pub disks: Vec<(usize, f64)>,
    /// Horizontal lines from `p.y` bounds.
    pub hlines: Vec<f64>,
    /// Vertical lines from `p.x` bounds.
    pub vlines: Vec<f64>,
    /// Objects the trace must reach, from `p = oK`.
    pub targets: Vec<usize>,
}

impl Geometry {
    pub fn from_formula(f: &Formula) -> Geometry {
        let mut g = Geometry::default();
        collect(f, &mut g);
        g
    }
}

fn collect(f: &Formula, g: &mut Geometry) {
    match f {
        Formula::Atom(a) => atom_geometry(a, g),
        Formula::Not(x) | Formula::Next(x) | Formula::Always(x) | Formula::Eventually(x) => collect(x, g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            collect(a, g);
            collect(b, g);
        }
    }
}

fn atom_geometry(a: &Atom, g: &mut Geometry) {
    let sides = [(&a.lhs, &a.rhs), (&a.rhs, &a.lhs)];
    for (x, y) in sides {
        match (x, y) {
            (Term::SqNorm(inner), Term::Scalar(r)) if *r > 0.0 => {
                if let Term::Sub(a, b) = inner.as_ref() {
                    if let (Term::Pos, Term::Object(k)) | (Term::Object(k), Term::Pos) = (a.as_ref(), b.as_ref()) {
                        g.disks.push((*k, r.sqrt()));
                    }
                }
            }
            (Term::Component(p, axis), Term::Scalar(c)) if matches!(p.as_ref(), Term::Pos) => match axis {
                0 => g.vlines.push(*c),
                1 => g.hlines.push(*c),
                _ => {}
            },
            (Term::Pos, Term::Object(k)) if a.op == Cmp::Eq => g.targets.push(*k),
            _ => {}
        }
    }
    g.targets.dedup();
}

struct Frame {
    x0: f64,
    y0: f64,
    span: f64,
    size: f64,
    pad: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.pad + (x - self.x0) / self.span * self.size
    }

    fn py(&self, y: f64) -> f64 {
        self.pad + self.size - (y - self.y0) / self.span * self.size
    }
}

fn points_attr(pts: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in pts {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Top-down view of a 2-D scene: demonstration, optional learned rollout,
/// objects, and the geometry of `spec`.
pub fn scene_svg(demo: &Trace, learned: Option<&Trace>, objects: &[Vec<f64>], spec: Option<&Formula>) -> String {
    let geo = spec.map(Geometry::from_formula).unwrap_or_default();
    let mut xs: Vec<f64> = vec![0.0, 1.0];
    let mut ys: Vec<f64> = vec![0.0, 1.0];
    for tr in std::iter::once(demo).chain(learned) {
        for p in tr.points() {
            xs.push(p[0]);
            ys.push(p[1]);
        }
    }
    for o in objects {
        xs.push(o[0]);
        ys.push(o[1]);
    }
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi(&xs) - lo(&xs)).max(hi(&ys) - lo(&ys)) * 1.1;
    let f = Frame {
        x0: (lo(&xs) + hi(&xs) - span) / 2.0,
        y0: (lo(&ys) + hi(&ys) - span) / 2.0,
        span,
        size: 440.0,
        pad: 20.0,
    };
    let mut s = header(480.0, 480.0);
    let (left, right) = (f.px(f.x0), f.px(f.x0 + span));
    let (top, bottom) = (f.py(f.y0 + span), f.py(f.y0));
    let _ = writeln!(
        s,
        "<rect x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#999\"/>",
        right - left,
        bottom - top
    );
    for &(k, r) in &geo.disks {
        if let Some(o) = objects.get(k) {
            let _ = writeln!(
                s,
                "<circle class=\"avoid\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{MARK_COLOR}\" fill-opacity=\"0.15\" stroke=\"{MARK_COLOR}\"/>",
                f.px(o[0]),
                f.py(o[1]),
                r / span * f.size
            );
        }
    }
    for &c in &geo.hlines {
        let _ = writeln!(
            s,
            "<line class=\"band\" x1=\"{left:.2}\" y1=\"{0:.2}\" x2=\"{right:.2}\" y2=\"{0:.2}\" stroke=\"{MARK_COLOR}\" stroke-dasharray=\"6 4\"/>",
            f.py(c)
        );
    }
    for &c in &geo.vlines {
        let _ = writeln!(
            s,
            "<line class=\"band\" x1=\"{0:.2}\" y1=\"{top:.2}\" x2=\"{0:.2}\" y2=\"{bottom:.2}\" stroke=\"{MARK_COLOR}\" stroke-dasharray=\"6 4\"/>",
            f.px(c)
        );
    }
    for (k, o) in objects.iter().enumerate() {
        let target = geo.targets.contains(&k);
        let _ = writeln!(
            s,
            "<circle class=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{}\" fill=\"{}\"/>",
            if target { "patrol" } else { "object" },
            f.px(o[0]),
            f.py(o[1]),
            if target { 6 } else { 4 },
            if target { MARK_COLOR } else { "#444" }
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"sans-serif\">o{}</text>",
            f.px(o[0]) + 7.0,
            f.py(o[1]) - 7.0,
            k + 1
        );
    }
    let mut line = |tr: &Trace, color: &str, class: &str| {
        let pts = points_attr(tr.points().iter().map(|p| (f.px(p[0]), f.py(p[1]))));
        let _ = writeln!(
            s,
            "<polyline class=\"{class}\" points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>"
        );
    };
    line(demo, DEMO_COLOR, "demo");
    if let Some(l) = learned {
        line(l, LEARNED_COLOR, "learned");
    }
    s.push_str("</svg>\n");
    s
}

/// Loss curves from a training history.
pub fn history_svg(history: &[EpochMetrics], title: &str) -> String {
    type Pick = fn(&EpochMetrics) -> Option<f64>;
    let series: [(&str, Pick); 4] = [
        ("train L_d", |m| Some(m.train_ld)),
        ("train L_c (hard)", |m| m.train_lc_hard),
        ("test L_d", |m| m.test_ld),
        ("test L_c (hard)", |m| m.test_lc_hard),
    ];
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let ymax = history
        .iter()
        .flat_map(|m| series.iter().filter_map(move |(_, pick)| pick(m)))
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let n = history.len().max(2) as f64;
    let px = |e: usize| pad + (e as f64 - 1.0) / (n - 1.0) * (w - 2.0 * pad);
    let py = |v: f64| h - pad - v / ymax * (h - 2.0 * pad);
    let mut s = header(w, h);
    let _ = writeln!(
        s,
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{0}\" stroke=\"black\"/>",
        h - pad,
        w - pad
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<text x=\"{pad}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">{ymax:.3e}</text>",
        pad - 5.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">epoch {}</text>",
        w - pad,
        h - pad + 20.0,
        history.len()
    );
    let mut row = 0;
    for (k, (name, pick)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = history.iter().filter_map(|m| pick(m).map(|v| (px(m.epoch), py(v)))).collect();
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[k];
        let _ = writeln!(
            s,
            "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points_attr(pts.into_iter())
        );
        let ly = pad + 15.0 * row as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{2}\" y=\"{3}\" font-size=\"11\" font-family=\"sans-serif\">{name}</text>",
            w - pad - 150.0,
            w - pad - 130.0,
            w - pad - 125.0,
            ly + 4.0
        );
        row += 1;
    }
    s.push_str("</svg>\n");
    s
}

const AXIS_NAMES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

/// One panel per axis, value over time. `learned` is drawn on top when
/// given.
pub fn axes_svg(demo: &Trace, learned: Option<&Trace>) -> String {
    let d = demo.dim();
    let (w, ph, pad) = (640.0, 110.0, 40.0);
    let h = ph * d as f64 + pad;
    let mut s = header(w, h);
    let t_max = (demo.len() - 1).max(1) as f64;
    for axis in 0..d {
        let top = pad / 2.0 + ph * axis as f64;
        let vals = || {
            std::iter::once(demo)
                .chain(learned)
                .flat_map(|tr| tr.points().iter().map(move |p| p[axis]))
        };
        let lo = vals().fold(f64::INFINITY, f64::min);
        let hi = vals().fold(f64::NEG_INFINITY, f64::max);
        let range = if hi > lo { hi - lo } else { 1.0 };
        let px = |t: usize| pad + t as f64 / t_max * (w - 2.0 * pad);
        let py = |v: f64| top + ph - 20.0 - (v - lo) / range * (ph - 30.0);
        let name = AXIS_NAMES.get(axis).map(|s| s.to_string()).unwrap_or(format!("axis {axis}"));
        let _ = writeln!(
            s,
            "<g class=\"panel\"><line x1=\"{pad}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"#999\"/><text x=\"4\" y=\"{2:.2}\" font-size=\"12\" font-family=\"sans-serif\">{name}</text>",
            top + ph - 10.0,
            w - pad,
            top + 14.0
        );
        let mut line = |tr: &Trace, color: &str, class: &str| {
            let pts = points_attr(tr.points().iter().enumerate().map(|(t, p)| (px(t), py(p[axis]))));
            let _ = writeln!(
                s,
                "<polyline class=\"{class}\" points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
            );
        };
        line(demo, DEMO_COLOR, "demo");
        if let Some(l) = learned {
            line(l, LEARNED_COLOR, "learned");
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{builtin_spec, compose_specs};

    #[test]
    fn geometry_of_builtins() {
        let f = compose_specs(["avoid", "steady", "patrol"].map(|n| builtin_spec(n).unwrap()).to_vec()).unwrap();
        let g = Geometry::from_formula(&f);
        assert_eq!(g.disks.len(), 1);
        assert_eq!(g.disks[0].0, 1);
        assert!((g.disks[0].1 - 0.1_f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.hlines, vec![0.25, 0.75]);
        assert_eq!(g.targets, vec![1, 2]);
    }

    #[test]
    fn scene_counts_polylines() {
        let tr = Trace::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], 1.0).unwrap();
        let svg = scene_svg(&tr, Some(&tr), &[vec![0.5, 0.5]], None);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(scene_svg(&tr, None, &[], None).matches("<polyline").count(), 1);
    }
}
