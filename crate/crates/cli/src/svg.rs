//! Minimal SVG plots: line series, scatter, and histogram.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    yscale: Scale,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, yscale: Scale) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            let y = match yscale {
                Scale::Linear => y,
                Scale::Log10 if y > 0.0 => y.log10(),
                Scale::Log10 => continue,
            };
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-300 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        Frame { x0, x1, y0, y1, yscale }
    }

    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let y = match self.yscale {
            Scale::Linear => y,
            Scale::Log10 if y > 0.0 => y.log10(),
            Scale::Log10 => return None,
        };
        if !(x.is_finite() && y.is_finite()) {
            return None;
        }
        let px = PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD);
        let py = H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD);
        Some((px, py))
    }
}

fn header(out: &mut String, title: &str, stamp: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "<!-- {} -->", escape(stamp));
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        "<polyline points=\"{PAD},{PAD} {PAD},{} {},{}\" fill=\"none\" stroke=\"black\"/>",
        H - PAD,
        W - PAD,
        H - PAD
    );
    let ylab = |v: f64| match f.yscale {
        Scale::Linear => format!("{v:.3e}"),
        Scale::Log10 => format!("1e{v:.1}"),
    };
    let text = |out: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            out,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        );
    };
    text(out, PAD, H - PAD + 14.0, "middle", &format!("{:.3}", f.x0));
    text(out, W - PAD, H - PAD + 14.0, "middle", &format!("{:.3}", f.x1));
    text(out, PAD - 4.0, H - PAD, "end", &ylab(f.y0));
    text(out, PAD - 4.0, PAD + 4.0, "end", &ylab(f.y1));
    text(out, W / 2.0, H - 12.0, "middle", xlabel);
    text(out, 14.0, H / 2.0, "middle", ylabel);
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = PAD + 14.0 * i as f64;
        let c = COLORS[i % COLORS.len()];
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"3\" fill=\"{c}\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            W - PAD - 120.0,
            y - 3.0,
            W - PAD - 106.0,
            y,
            escape(name)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

pub fn line_plot(title: &str, stamp: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>], yscale: Scale) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()), yscale);
    let mut out = String::new();
    header(&mut out, title, stamp);
    axes(&mut out, &f, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter_map(|&(x, y)| f.map(x, y))
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts.join(" "),
            COLORS[i % COLORS.len()]
        );
    }
    legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

pub fn scatter_plot(title: &str, stamp: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>]) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()), Scale::Linear);
    let mut out = String::new();
    header(&mut out, title, stamp);
    axes(&mut out, &f, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        for (x, y) in s.points.iter().filter_map(|&(x, y)| f.map(x, y)) {
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>", COLORS[i % COLORS.len()]);
        }
    }
    legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Histogram of `log10(values)` for positive entries.
pub fn log_histogram(title: &str, stamp: &str, xlabel: &str, values: &[f64], bins: usize) -> String {
    let logs: Vec<f64> = values.iter().filter(|v| **v > 0.0).map(|v| v.log10()).collect();
    let bins = bins.max(1);
    let (lo, hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 0.5, lo.max(0.0) + 0.5) };
    let mut counts = vec![0usize; bins];
    for v in &logs {
        let b = (((v - lo) / (hi - lo)) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let width = (hi - lo) / bins as f64;
    let f = Frame::fit(
        [(lo, 0.0), (hi, counts.iter().copied().max().unwrap_or(0) as f64)].into_iter(),
        Scale::Linear,
    );
    let mut out = String::new();
    header(&mut out, title, stamp);
    axes(&mut out, &f, xlabel, "count");
    for (i, c) in counts.iter().enumerate() {
        let left = lo + width * i as f64;
        if let (Some((x0, y0)), Some((x1, y1))) = (f.map(left, *c as f64), f.map(left + width, 0.0)) {
            let _ = writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"white\"/>",
                x1 - x0,
                y1 - y0,
                COLORS[0]
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = Series {
            name: "a<b",
            points: vec![(0.0, 1.0), (1.0, 0.1), (2.0, 0.0)],
        };
        let svg = line_plot("t", "hash", "x", "y", &[s], Scale::Log10);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        // The zero is dropped on a log axis.
        let poly = svg.lines().find(|l| l.contains("stroke-width")).unwrap();
        assert_eq!(poly.matches(',').count(), 2);
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        let svg = scatter_plot("s", "", "x", "y", &[Series { name: "p", points: vec![(1.0, 1.0)] }]);
        assert!(svg.contains("<circle"));
        let svg = log_histogram("h", "", "r", &[0.0, 1e-8, 1e-8], 5);
        assert!(svg.contains("<rect"));
        let svg = log_histogram("h", "", "r", &[], 5);
        assert!(svg.ends_with("</svg>\n"));
    }
}
